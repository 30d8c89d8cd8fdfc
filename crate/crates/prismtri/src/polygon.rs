//! Triangulations of the convex n-gon, their dual trees rooted at a
//! boundary edge, admissible orderings, the parent map, and region edge
//! sets.
//!
//! The polygon here is abstract (no layer): vertices are the indices
//! `0..n` in convex position. The 3D modules attach a layer when they need
//! heights.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::shape::{Chord, Layer, Side};

/// An edge of the abstract n-gon, stored with `a < b`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PolyEdge {
    pub a: u32,
    pub b: u32,
}

impl PolyEdge {
    pub fn new(a: u32, b: u32, n: u32) -> Result<PolyEdge> {
        let a = a % n;
        let b = b % n;
        if a == b {
            return Err(Error::Domain(format!("degenerate edge ({a}, {b})")));
        }
        Ok(PolyEdge {
            a: a.min(b),
            b: a.max(b),
        })
    }

    pub fn is_boundary(&self, n: u32) -> bool {
        self.b - self.a == 1 || (self.a == 0 && self.b == n - 1)
    }

    /// Strict crossing test for two chords of the same polygon.
    pub fn crosses(&self, other: &PolyEdge) -> bool {
        let strictly_between = |x: u32, lo: u32, hi: u32| lo < x && x < hi;
        let inside_self_a = strictly_between(other.a, self.a, self.b);
        let inside_self_b = strictly_between(other.b, self.a, self.b);
        if other.a == self.a || other.a == self.b || other.b == self.a || other.b == self.b {
            return false;
        }
        inside_self_a != inside_self_b
    }

    /// The same edge as a layered chord.
    pub fn chord(&self, layer: Layer, n: u32) -> Chord {
        Chord::new(layer, self.a, self.b, n).expect("valid edge")
    }
}

/// A triangle of the polygon, stored as a sorted vertex triple.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Triangle(pub [u32; 3]);

impl Triangle {
    pub fn new(mut v: [u32; 3]) -> Triangle {
        v.sort_unstable();
        Triangle(v)
    }

    pub fn contains_edge(&self, e: &PolyEdge) -> bool {
        self.0.contains(&e.a) && self.0.contains(&e.b)
    }

    pub fn edges(&self, n: u32) -> [PolyEdge; 3] {
        let [a, b, c] = self.0;
        [
            PolyEdge::new(a, b, n).unwrap(),
            PolyEdge::new(a, c, n).unwrap(),
            PolyEdge::new(b, c, n).unwrap(),
        ]
    }

    /// The vertex not on the given edge.
    pub fn apex_off(&self, e: &PolyEdge) -> u32 {
        *self
            .0
            .iter()
            .find(|v| **v != e.a && **v != e.b)
            .expect("edge belongs to triangle")
    }
}

/// A triangulation of the convex n-gon: n - 3 pairwise non-crossing
/// diagonals inducing n - 2 triangles.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolygonTriangulation {
    n: u32,
    diagonals: BTreeSet<PolyEdge>,
}

impl PolygonTriangulation {
    pub fn new(n: u32, diagonals: BTreeSet<PolyEdge>) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("polygon needs n >= 3, got {n}")));
        }
        if diagonals.len() as u32 != n - 3 {
            return Err(Error::Domain(format!(
                "expected {} diagonals, got {}",
                n - 3,
                diagonals.len()
            )));
        }
        for d in &diagonals {
            if d.is_boundary(n) || d.b >= n {
                return Err(Error::Domain(format!("({}, {}) is not a diagonal", d.a, d.b)));
            }
        }
        let v: Vec<&PolyEdge> = diagonals.iter().collect();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                if v[i].crosses(v[j]) {
                    return Err(Error::Domain(format!(
                        "diagonals ({}, {}) and ({}, {}) cross",
                        v[i].a, v[i].b, v[j].a, v[j].b
                    )));
                }
            }
        }
        Ok(PolygonTriangulation { n, diagonals })
    }

    /// Rebuilds a triangulation from its triangle set, validating coverage.
    pub fn from_triangles(n: u32, triangles: &[Triangle]) -> Result<Self> {
        if triangles.len() as u32 != n.max(2) - 2 {
            return Err(Error::Domain(format!(
                "expected {} triangles, got {}",
                n - 2,
                triangles.len()
            )));
        }
        let mut diagonals = BTreeSet::new();
        for t in triangles {
            for e in t.edges(n) {
                if !e.is_boundary(n) {
                    diagonals.insert(e);
                }
            }
        }
        let pt = PolygonTriangulation::new(n, diagonals)?;
        let mut expect = pt.triangles();
        expect.sort_unstable();
        let mut got = triangles.to_vec();
        got.sort_unstable();
        if expect != got {
            return Err(Error::Domain(
                "triangle set does not tile the polygon".into(),
            ));
        }
        Ok(pt)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn diagonals(&self) -> &BTreeSet<PolyEdge> {
        &self.diagonals
    }

    pub fn boundary_edges(&self) -> Vec<PolyEdge> {
        (0..self.n)
            .map(|i| PolyEdge::new(i, (i + 1) % self.n, self.n).unwrap())
            .collect()
    }

    /// All edges: the n boundary edges plus the diagonals.
    pub fn edges(&self) -> Vec<PolyEdge> {
        let mut e = self.boundary_edges();
        e.extend(self.diagonals.iter().copied());
        e
    }

    /// The n - 2 triangles, in lexicographic order.
    ///
    /// In a polygon triangulation the triangles are exactly the 3-cliques of
    /// the edge graph: a clique's interior contains no vertex (convex
    /// position), so it cannot be subdivided and must be a face.
    pub fn triangles(&self) -> Vec<Triangle> {
        let n = self.n;
        let mut adj = vec![false; (n * n) as usize];
        let set_edge = |a: u32, b: u32, adj: &mut Vec<bool>| {
            adj[(a * n + b) as usize] = true;
            adj[(b * n + a) as usize] = true;
        };
        for i in 0..n {
            set_edge(i, (i + 1) % n, &mut adj);
        }
        for d in &self.diagonals {
            set_edge(d.a, d.b, &mut adj);
        }
        let has = |a: u32, b: u32| adj[(a * n + b) as usize];
        let mut out = Vec::with_capacity((n - 2) as usize);
        for a in 0..n {
            for b in a + 1..n {
                if !has(a, b) {
                    continue;
                }
                for c in b + 1..n {
                    if has(a, c) && has(b, c) {
                        out.push(Triangle([a, b, c]));
                    }
                }
            }
        }
        out
    }
}

/// All triangulations of the convex n-gon; the count is the Catalan number
/// C(n-2).
pub fn enumerate_polygon_triangulations(n: u32) -> Result<Vec<PolygonTriangulation>> {
    if !(3..=16).contains(&n) {
        return Err(Error::Capacity(format!(
            "polygon enumeration supports 3 <= n <= 16, got {n}"
        )));
    }
    let mut out = Vec::new();
    let mut work = vec![(0..n).collect::<Vec<u32>>()];
    let mut diags = BTreeSet::new();
    split(&mut work, n, &mut diags, &mut out);
    Ok(out)
}

/// Recursive ear split over a worklist of sub-polygons (contiguous arcs of
/// the original cycle). Branches over the apex of the triangle on the edge
/// (first, last) of one sub-polygon; every triangulation is produced exactly
/// once because that triangle choice is forced per branch.
fn split(
    work: &mut Vec<Vec<u32>>,
    n: u32,
    diags: &mut BTreeSet<PolyEdge>,
    out: &mut Vec<PolygonTriangulation>,
) {
    let Some(pos) = work.iter().position(|v| v.len() >= 3) else {
        out.push(PolygonTriangulation::new(n, diags.clone()).expect("valid by construction"));
        return;
    };
    let verts = work.swap_remove(pos);
    let first = verts[0];
    let last = *verts.last().unwrap();
    for k in 1..verts.len() - 1 {
        let apex = verts[k];
        let d1 = PolyEdge::new(first, apex, n).unwrap();
        let d2 = PolyEdge::new(apex, last, n).unwrap();
        let added1 = !d1.is_boundary(n) && diags.insert(d1);
        let added2 = !d2.is_boundary(n) && diags.insert(d2);
        work.push(verts[..=k].to_vec());
        work.push(verts[k..].to_vec());
        split(work, n, diags, out);
        work.pop();
        work.pop();
        if added1 {
            diags.remove(&d1);
        }
        if added2 {
            diags.remove(&d2);
        }
    }
    work.push(verts);
    let last_idx = work.len() - 1;
    work.swap(pos.min(last_idx), last_idx);
}

/// An ordering of a polygon triangulation's triangles compatible with the
/// dual tree rooted at a boundary edge.
///
/// `order[0]` is the triangle adjacent to the root edge; every other
/// triangle appears after its tree parent. `parent[i]` and `separating[i]`
/// (for `i >= 1`) give the parent's order index and the shared diagonal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AdmissibleOrder {
    pub root_edge: PolyEdge,
    pub order: Vec<Triangle>,
    pub parent: Vec<usize>,
    pub separating: Vec<PolyEdge>,
}

impl AdmissibleOrder {
    /// Looks up the order index of a triangle.
    pub fn index_of(&self, t: &Triangle) -> Option<usize> {
        self.order.iter().position(|x| x == t)
    }
}

fn dual_adjacency(
    pt: &PolygonTriangulation,
    triangles: &[Triangle],
) -> BTreeMap<usize, Vec<(usize, PolyEdge)>> {
    let mut by_diag: BTreeMap<PolyEdge, Vec<usize>> = BTreeMap::new();
    for (i, t) in triangles.iter().enumerate() {
        for e in t.edges(pt.n()) {
            if !e.is_boundary(pt.n()) {
                by_diag.entry(e).or_default().push(i);
            }
        }
    }
    let mut adj: BTreeMap<usize, Vec<(usize, PolyEdge)>> = BTreeMap::new();
    for (e, ts) in by_diag {
        debug_assert_eq!(ts.len(), 2, "diagonal shared by exactly two triangles");
        adj.entry(ts[0]).or_default().push((ts[1], e));
        adj.entry(ts[1]).or_default().push((ts[0], e));
    }
    adj
}

/// Breadth-first tree-compatible ordering rooted at a boundary edge.
/// Children are visited in increasing lexicographic order of their vertex
/// triples, which makes the result deterministic.
pub fn admissible_order(pt: &PolygonTriangulation, root_edge: &PolyEdge) -> Result<AdmissibleOrder> {
    if !root_edge.is_boundary(pt.n()) {
        return Err(Error::Domain(format!(
            "root edge ({}, {}) is not a boundary edge",
            root_edge.a, root_edge.b
        )));
    }
    let triangles = pt.triangles();
    let root = triangles
        .iter()
        .position(|t| t.contains_edge(root_edge))
        .ok_or_else(|| Error::Structural("no triangle on root edge".into()))?;
    let adj = dual_adjacency(pt, &triangles);

    let mut order = vec![triangles[root]];
    let mut parent = vec![0usize];
    let mut separating = vec![PolyEdge { a: root_edge.a, b: root_edge.b }];
    let mut placed = vec![false; triangles.len()];
    placed[root] = true;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut order_index = BTreeMap::from([(root, 0usize)]);
    while let Some(cur) = queue.pop_front() {
        let mut children: Vec<(usize, PolyEdge)> = adj
            .get(&cur)
            .map(|v| v.iter().filter(|(t, _)| !placed[*t]).copied().collect())
            .unwrap_or_default();
        children.sort_by_key(|(t, _)| triangles[*t]);
        for (t, e) in children {
            placed[t] = true;
            order_index.insert(t, order.len());
            parent.push(order_index[&cur]);
            separating.push(e);
            order.push(triangles[t]);
            queue.push_back(t);
        }
    }
    if order.len() != triangles.len() {
        return Err(Error::Structural("dual tree is disconnected".into()));
    }
    Ok(AdmissibleOrder {
        root_edge: *root_edge,
        order,
        parent,
        separating,
    })
}

/// Every tree-compatible ordering for the given root (all linear extensions
/// of the rooted dual tree). Intended for exhaustive sweeps at small n.
pub fn all_admissible_orders(
    pt: &PolygonTriangulation,
    root_edge: &PolyEdge,
) -> Result<Vec<AdmissibleOrder>> {
    if pt.n() > 10 {
        return Err(Error::Capacity(format!(
            "all-orders enumeration supports n <= 10, got {}",
            pt.n()
        )));
    }
    let canonical = admissible_order(pt, root_edge)?;
    let triangles = pt.triangles();
    let adj = dual_adjacency(pt, &triangles);
    let root = triangles
        .iter()
        .position(|t| t.contains_edge(root_edge))
        .unwrap();

    // parent_of[t] in triangle-list indexing, derived from the rooted tree.
    let mut parent_of: BTreeMap<usize, (usize, PolyEdge)> = BTreeMap::new();
    let mut stack = vec![root];
    let mut seen = vec![false; triangles.len()];
    seen[root] = true;
    while let Some(cur) = stack.pop() {
        for (t, e) in adj.get(&cur).cloned().unwrap_or_default() {
            if !seen[t] {
                seen[t] = true;
                parent_of.insert(t, (cur, e));
                stack.push(t);
            }
        }
    }

    let mut out = Vec::new();
    let mut prefix = vec![root];
    extensions(&triangles, &parent_of, root, &mut prefix, &mut out);
    let orders = out
        .into_iter()
        .map(|perm| {
            let pos: BTreeMap<usize, usize> =
                perm.iter().enumerate().map(|(i, t)| (*t, i)).collect();
            let mut parent = vec![0usize];
            let mut separating = vec![*root_edge];
            for t in &perm[1..] {
                let (p, e) = parent_of[t];
                parent.push(pos[&p]);
                separating.push(e);
            }
            AdmissibleOrder {
                root_edge: *root_edge,
                order: perm.iter().map(|t| triangles[*t]).collect(),
                parent,
                separating,
            }
        })
        .collect::<Vec<_>>();
    debug_assert!(orders.contains(&canonical));
    Ok(orders)
}

fn extensions(
    triangles: &[Triangle],
    parent_of: &BTreeMap<usize, (usize, PolyEdge)>,
    _root: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if prefix.len() == triangles.len() {
        out.push(prefix.clone());
        return;
    }
    for t in 0..triangles.len() {
        if prefix.contains(&t) {
            continue;
        }
        if let Some((p, _)) = parent_of.get(&t) {
            if !prefix.contains(p) {
                continue;
            }
        }
        prefix.push(t);
        extensions(triangles, parent_of, _root, prefix, out);
        prefix.pop();
    }
}

/// An edge of a region together with the positive-side convention its
/// height function uses: boundary edges face the polygon interior, a
/// separating diagonal faces its own region.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SidedEdge {
    pub edge: PolyEdge,
    pub side: Side,
}

/// Region edge sets: `x[0]` is the full boundary; `x[i-1]` for `i >= 2` is
/// the boundary of the sub-polygon cut off by the i-th separating diagonal
/// on the i-th triangle's side, including the diagonal itself.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RegionEdgeSets {
    pub x: Vec<Vec<SidedEdge>>,
}

/// Boundary edges of the sub-polygon on one side of a chord, plus the chord
/// itself (sided toward that region). Independent of any triangulation.
pub fn region_edges_of(edge: &PolyEdge, side: Side, n: u32) -> Vec<SidedEdge> {
    let mut out = vec![SidedEdge { edge: *edge, side }];
    let chord = Chord {
        layer: Layer::Top,
        a: edge.a,
        b: edge.b,
    };
    for c in 0..n {
        let e = PolyEdge::new(c, (c + 1) % n, n).unwrap();
        if e == *edge {
            continue;
        }
        // The boundary edge belongs to the region iff both endpoints lie in
        // the closed arc on the region side.
        let in_region = |v: u32| v == edge.a || v == edge.b || side.contains(&chord, v);
        if in_region(e.a) && in_region(e.b) {
            let interior = Side::interior_of_boundary_edge(&e.chord(Layer::Top, n), n).unwrap();
            out.push(SidedEdge {
                edge: e,
                side: interior,
            });
        }
    }
    out
}

/// Region edge sets for an admissible order.
pub fn region_edge_sets(pt: &PolygonTriangulation, ao: &AdmissibleOrder) -> Result<RegionEdgeSets> {
    let n = pt.n();
    let mut x = Vec::with_capacity(ao.order.len());
    let x1 = pt
        .boundary_edges()
        .into_iter()
        .map(|e| {
            let side = Side::interior_of_boundary_edge(&e.chord(Layer::Top, n), n).unwrap();
            SidedEdge { edge: e, side }
        })
        .collect();
    x.push(x1);
    for i in 1..ao.order.len() {
        let e = ao.separating[i];
        let tri = &ao.order[i];
        let chord = e.chord(Layer::Top, n);
        let apex = tri.apex_off(&e);
        let side = Side::containing(&chord, apex, n)
            .map_err(|_| Error::Domain("order inconsistent with triangulation".into()))?;
        // Every triangle inside the region must have order index >= i.
        for (j, t) in ao.order.iter().enumerate() {
            let inside = t
                .0
                .iter()
                .all(|v| *v == e.a || *v == e.b || side.contains(&chord, *v));
            if inside && j < i {
                return Err(Error::Structural(format!(
                    "triangle {t:?} on far side of separating edge has index {j} < {i}"
                )));
            }
        }
        x.push(region_edges_of(&e, side, n));
    }
    Ok(RegionEdgeSets { x })
}
