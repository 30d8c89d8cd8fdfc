//! The quantitative machinery behind the maximal-size formulas: link
//! extraction, the two equivalent expressions for the total link size
//! (direct and telescoped over region edge sets), the per-step
//! monotonicity lemma, and the closed-form maxima.
//!
//! Size accounting: every triangulation of the solid has exactly n - 2
//! tets joining a top triangle to a bottom vertex and n - 2 joining a
//! bottom triangle to a top vertex; all remaining tets join a top edge to a
//! bottom edge, one per link element. The closed-form maximum is the
//! boundary height profile sum plus 2n - 4.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::prelude::*;
use rand::rngs::StdRng;

use crate::error::{Error, Result};
use crate::kernel::{classify_tet, Triangulation3D};
use crate::polygon::{
    admissible_order, all_admissible_orders, enumerate_polygon_triangulations, region_edge_sets,
    AdmissibleOrder, PolyEdge, PolygonTriangulation, RegionEdgeSets, SidedEdge, Triangle,
};
use crate::shape::{height_table, Chord, Kind, Layer, ShapeSpec, Side};

/// Closed-form maximal triangulation size.
pub fn formula_max(shape: &ShapeSpec) -> u64 {
    let n = shape.n() as u64;
    match shape.kind() {
        Kind::Prism => (n * n + 6 * n - 16).div_ceil(4),
        Kind::Antiprism => (n * n + 8 * n - 16) / 4,
    }
}

/// Closed-form maximum of the total link size (the boundary height profile
/// sum).
pub fn formula_alpha(shape: &ShapeSpec) -> u64 {
    let n = shape.n() as u64;
    match (shape.kind(), n % 2) {
        (Kind::Prism, 0) => (n * n - 2 * n) / 4,
        (Kind::Prism, _) => (n * n - 2 * n + 1) / 4,
        (Kind::Antiprism, 0) => n * n / 4,
        (Kind::Antiprism, _) => (n * n - 1) / 4,
    }
}

/// Assignment of a bottom vertex x_i to each triangle of the ordered top
/// triangulation, indexed by order position.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ApexAssignment {
    pub x: Vec<u32>,
}

impl ApexAssignment {
    pub fn from_extraction(ao: &AdmissibleOrder, top_apex: &BTreeMap<Triangle, u32>) -> Result<Self> {
        let x = ao
            .order
            .iter()
            .map(|t| {
                top_apex
                    .get(t)
                    .copied()
                    .ok_or_else(|| Error::Structural(format!("no apex for triangle {t:?}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        Ok(ApexAssignment { x })
    }
}

/// Links of top-polygon edges: the bottom edges joined to each top edge by
/// a (2,2) tet.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct LinkMap {
    pub links: BTreeMap<PolyEdge, BTreeSet<PolyEdge>>,
}

impl LinkMap {
    pub fn total_size(&self) -> usize {
        self.links.values().map(|s| s.len()).sum()
    }
}

/// Combinatorial structure read off a valid triangulation: the induced top
/// and bottom polygon triangulations, their apex assignments, and the link
/// map of the (2,2) layer.
#[derive(Clone, Debug)]
pub struct ExtractedStructure {
    pub top: PolygonTriangulation,
    pub bottom: PolygonTriangulation,
    pub top_apex: BTreeMap<Triangle, u32>,
    pub bottom_apex: BTreeMap<Triangle, u32>,
    pub links: LinkMap,
}

/// Reads the layered structure out of a (presumed valid) triangulation.
/// Structural assertions failing here indicate a validator bug.
pub fn extract_structure(tri: &Triangulation3D) -> Result<ExtractedStructure> {
    let n = tri.shape.n();
    let mut top_tris = Vec::new();
    let mut bottom_tris = Vec::new();
    let mut top_apex = BTreeMap::new();
    let mut bottom_apex = BTreeMap::new();
    let mut links = LinkMap::default();
    for t in &tri.tets {
        let tops: Vec<u32> = t
            .points()
            .iter()
            .filter(|p| p.layer == Layer::Top)
            .map(|p| p.index)
            .collect();
        let bots: Vec<u32> = t
            .points()
            .iter()
            .filter(|p| p.layer == Layer::Bottom)
            .map(|p| p.index)
            .collect();
        match classify_tet(t) {
            (3, 1) => {
                let tr = Triangle::new([tops[0], tops[1], tops[2]]);
                if top_apex.insert(tr, bots[0]).is_some() {
                    return Err(Error::Structural(format!(
                        "top triangle {tr:?} joined to two bottom vertices"
                    )));
                }
                top_tris.push(tr);
            }
            (1, 3) => {
                let tr = Triangle::new([bots[0], bots[1], bots[2]]);
                if bottom_apex.insert(tr, tops[0]).is_some() {
                    return Err(Error::Structural(format!(
                        "bottom triangle {tr:?} joined to two top vertices"
                    )));
                }
                bottom_tris.push(tr);
            }
            (2, 2) => {
                let te = PolyEdge::new(tops[0], tops[1], n)?;
                let be = PolyEdge::new(bots[0], bots[1], n)?;
                links.links.entry(te).or_default().insert(be);
            }
            other => {
                return Err(Error::Structural(format!(
                    "tet {t} has layer signature {other:?}"
                )))
            }
        }
    }
    let top = PolygonTriangulation::from_triangles(n, &top_tris)
        .map_err(|e| Error::Structural(format!("top layer: {e}")))?;
    let bottom = PolygonTriangulation::from_triangles(n, &bottom_tris)
        .map_err(|e| Error::Structural(format!("bottom layer: {e}")))?;
    // Every (2,2) top edge must be an edge of the induced top triangulation
    // (crossing one would intersect a top facet improperly).
    let top_edges: BTreeSet<PolyEdge> = top.edges().into_iter().collect();
    for e in links.links.keys() {
        if !top_edges.contains(e) {
            return Err(Error::Structural(format!(
                "link edge ({}, {}) is not an edge of the top triangulation",
                e.a, e.b
            )));
        }
    }
    Ok(ExtractedStructure {
        top,
        bottom,
        top_apex,
        bottom_apex,
        links,
    })
}

/// Lazily built per-edge height tables over bottom vertices, shared across
/// sweeps so the exhaustive identity checks stay cheap.
pub struct EdgeHeightTables {
    shape: ShapeSpec,
    map: HashMap<(PolyEdge, Side), Vec<u32>>,
}

impl EdgeHeightTables {
    pub fn new(shape: ShapeSpec) -> Self {
        EdgeHeightTables {
            shape,
            map: HashMap::new(),
        }
    }

    pub fn get(&mut self, edge: &PolyEdge, side: Side) -> &[u32] {
        let shape = self.shape;
        self.map.entry((*edge, side)).or_insert_with(|| {
            let chord = Chord {
                layer: Layer::Top,
                a: edge.a,
                b: edge.b,
            };
            height_table(&shape, &chord, side).expect("valid edge")
        })
    }

    fn interior(&mut self, edge: &PolyEdge) -> &[u32] {
        let n = self.shape.n();
        let chord = Chord {
            layer: Layer::Top,
            a: edge.a,
            b: edge.b,
        };
        let side = Side::interior_of_boundary_edge(&chord, n).expect("boundary edge");
        self.get(edge, side)
    }
}

/// Side convention of an interior edge inside an ordered triangulation:
/// positive toward the greater-index incident triangle.
fn interior_side(ao: &AdmissibleOrder, idx: usize, n: u32) -> Result<Side> {
    let e = ao.separating[idx];
    let tri = &ao.order[idx];
    let chord = Chord {
        layer: Layer::Top,
        a: e.a,
        b: e.b,
    };
    Side::containing(&chord, tri.apex_off(&e), n)
}

/// Total link size bound, summed edge by edge: exterior edges contribute
/// the height of their triangle's apex, interior edges the height gap
/// between the two incident apexes (greater order index first).
pub fn alpha_eq1(
    shape: &ShapeSpec,
    pt: &PolygonTriangulation,
    ao: &AdmissibleOrder,
    apex: &ApexAssignment,
) -> Result<i64> {
    let mut tables = EdgeHeightTables::new(*shape);
    alpha_eq1_cached(&mut tables, pt, ao, apex)
}

pub fn alpha_eq1_cached(
    tables: &mut EdgeHeightTables,
    pt: &PolygonTriangulation,
    ao: &AdmissibleOrder,
    apex: &ApexAssignment,
) -> Result<i64> {
    let n = pt.n();
    if apex.x.len() != ao.order.len() {
        return Err(Error::Domain("apex assignment length mismatch".into()));
    }
    let mut sum: i64 = 0;
    for e in pt.boundary_edges() {
        let i = ao
            .order
            .iter()
            .position(|t| t.contains_edge(&e))
            .ok_or_else(|| Error::Structural("boundary edge without triangle".into()))?;
        sum += tables.interior(&e)[apex.x[i] as usize] as i64;
    }
    for idx in 1..ao.order.len() {
        let e = ao.separating[idx];
        let side = interior_side(ao, idx, n)?;
        let table = tables.get(&e, side);
        sum += table[apex.x[idx] as usize] as i64 - table[apex.x[ao.parent[idx]] as usize] as i64;
    }
    Ok(sum)
}

/// The same quantity re-expressed over region edge sets: the first term
/// sums the full boundary at x_1, and each later term the height gaps of
/// one region. Per-term values are reported so non-positivity can be
/// checked for genuine triangulations.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub alpha_eq1: i64,
    pub alpha_eq2: i64,
    pub first_term: i64,
    pub per_term: Vec<i64>,
    pub formula_alpha: i64,
    pub total_bound: i64,
}

pub fn alpha_eq2(
    shape: &ShapeSpec,
    pt: &PolygonTriangulation,
    ao: &AdmissibleOrder,
    apex: &ApexAssignment,
    x: &RegionEdgeSets,
) -> Result<BoundReport> {
    let mut tables = EdgeHeightTables::new(*shape);
    alpha_eq2_cached(&mut tables, shape, pt, ao, apex, x)
}

pub fn alpha_eq2_cached(
    tables: &mut EdgeHeightTables,
    shape: &ShapeSpec,
    pt: &PolygonTriangulation,
    ao: &AdmissibleOrder,
    apex: &ApexAssignment,
    x: &RegionEdgeSets,
) -> Result<BoundReport> {
    if apex.x.len() != ao.order.len() || x.x.len() != ao.order.len() {
        return Err(Error::Domain("assignment or region sets length mismatch".into()));
    }
    let first_term: i64 = x.x[0]
        .iter()
        .map(|s| tables.get(&s.edge, s.side)[apex.x[0] as usize] as i64)
        .sum();
    let mut per_term = Vec::with_capacity(x.x.len().saturating_sub(1));
    for idx in 1..x.x.len() {
        let xi = apex.x[idx] as usize;
        let xp = apex.x[ao.parent[idx]] as usize;
        let term: i64 = x.x[idx]
            .iter()
            .map(|s| {
                let t = tables.get(&s.edge, s.side);
                t[xi] as i64 - t[xp] as i64
            })
            .sum();
        per_term.push(term);
    }
    let alpha2 = first_term + per_term.iter().sum::<i64>();
    let alpha1 = alpha_eq1_cached(tables, pt, ao, apex)?;
    let n = shape.n() as i64;
    Ok(BoundReport {
        alpha_eq1: alpha1,
        alpha_eq2: alpha2,
        first_term,
        per_term,
        formula_alpha: formula_alpha(shape) as i64,
        total_bound: formula_alpha(shape) as i64 + 2 * n - 4,
    })
}

/// Sum of heights of `v` over a set of sided edges.
pub fn g_sum(shape: &ShapeSpec, edges: &[SidedEdge], v: u32) -> Result<i64> {
    if v >= shape.n() {
        return Err(Error::Domain(format!("vertex {v} out of range")));
    }
    let mut tables = EdgeHeightTables::new(*shape);
    Ok(edges
        .iter()
        .map(|s| tables.get(&s.edge, s.side)[v as usize] as i64)
        .sum())
}

/// The per-step monotonicity lemma for one interior chord and side: along
/// every boundary step of the bottom polygon that strictly increases the
/// chord functional, the region height sum g does not increase.
pub fn check_monotone_lemma(shape: &ShapeSpec, chord: &Chord, side: Side) -> Result<bool> {
    let n = shape.n();
    if chord.is_boundary(n) {
        return Err(Error::Domain(format!(
            "chord ({}, {}) is a boundary edge, not interior",
            chord.a, chord.b
        )));
    }
    let edge = PolyEdge::new(chord.a, chord.b, n)?;
    let region = crate::polygon::region_edges_of(&edge, side, n);
    let mut tables = EdgeHeightTables::new(*shape);
    let g: Vec<i64> = (0..n)
        .map(|v| {
            region
                .iter()
                .map(|s| tables.get(&s.edge, s.side)[v as usize] as i64)
                .sum()
        })
        .collect();
    // Height ranks order vertices exactly like the functional does.
    let rank = height_table(shape, chord, side)?;
    for v in 0..n {
        let w = (v + 1) % n;
        let (rv, rw) = (rank[v as usize], rank[w as usize]);
        if rw > rv && g[w as usize] > g[v as usize] {
            return Ok(false);
        }
        if rv > rw && g[v as usize] > g[w as usize] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks every link of a triangulation against its height bound and the
/// path discipline: each nonempty link must form a contiguous path of
/// bottom edges that is strictly monotone in the edge functional's order.
pub fn link_bounds_check(tri: &Triangulation3D) -> Result<bool> {
    let shape = tri.shape;
    let n = shape.n();
    let ext = extract_structure(tri)?;
    let root = PolyEdge::new(0, 1, n)?;
    let ao = admissible_order(&ext.top, &root)?;
    let apex = ApexAssignment::from_extraction(&ao, &ext.top_apex)?;
    let mut tables = EdgeHeightTables::new(shape);
    let empty = BTreeSet::new();
    for e in ext.top.edges() {
        let link = ext.links.links.get(&e).unwrap_or(&empty);
        let (cap, side) = if e.is_boundary(n) {
            let i = ao
                .order
                .iter()
                .position(|t| t.contains_edge(&e))
                .ok_or_else(|| Error::Structural("boundary edge without triangle".into()))?;
            let chord = e.chord(Layer::Top, n);
            let side = Side::interior_of_boundary_edge(&chord, n)?;
            let cap = tables.get(&e, side)[apex.x[i] as usize] as i64;
            (cap, side)
        } else {
            let idx = (1..ao.order.len())
                .find(|i| ao.separating[*i] == e)
                .ok_or_else(|| Error::Structural("diagonal without separating index".into()))?;
            let side = interior_side(&ao, idx, n)?;
            let t = tables.get(&e, side);
            let cap =
                t[apex.x[idx] as usize] as i64 - t[apex.x[ao.parent[idx]] as usize] as i64;
            (cap, side)
        };
        if (link.len() as i64) > cap {
            return Ok(false);
        }
        if !link.is_empty() && !is_monotone_path(&mut tables, &e, side, link) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether a set of bottom edges forms a single path whose vertex sequence
/// is strictly monotone in the chord functional's order.
fn is_monotone_path(
    tables: &mut EdgeHeightTables,
    top_edge: &PolyEdge,
    side: Side,
    link: &BTreeSet<PolyEdge>,
) -> bool {
    let mut degree: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for e in link {
        degree.entry(e.a).or_default().push(e.b);
        degree.entry(e.b).or_default().push(e.a);
    }
    if degree.values().any(|v| v.len() > 2) {
        return false;
    }
    let ends: Vec<u32> = degree
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(k, _)| *k)
        .collect();
    if ends.len() != 2 || degree.len() != link.len() + 1 {
        return false; // a cycle or several components
    }
    // Walk from one endpoint.
    let mut seq = vec![ends[0]];
    let mut prev = None;
    loop {
        let cur = *seq.last().unwrap();
        let next = degree[&cur].iter().find(|v| Some(**v) != prev);
        match next {
            Some(v) => {
                prev = Some(cur);
                seq.push(*v);
                if *v == ends[1] {
                    break;
                }
            }
            None => break,
        }
    }
    if seq.len() != link.len() + 1 {
        return false;
    }
    let table = tables.get(top_edge, side);
    let ranks: Vec<u32> = seq.iter().map(|v| table[*v as usize]).collect();
    let decreasing = ranks.windows(2).all(|w| w[0] > w[1]);
    let increasing = ranks.windows(2).all(|w| w[0] < w[1]);
    decreasing || increasing
}

/// Outcome of an identity sweep.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentitySweep {
    pub instances: u64,
    pub failures: u64,
    /// Max alpha over assignments consistent with a triangulation's
    /// above-relation (x_i at least as high as its parent on every
    /// separating edge); this is the quantity the closed form bounds.
    pub max_alpha_consistent: i64,
}

/// Exhaustive identity check for one shape: every polygon triangulation,
/// every rooted ordering (all tree-compatible orders when `all_orders`),
/// every apex assignment. Guarded to n <= 6 where n^(n-2) stays small.
pub fn sweep_identity_exhaustive(shape: &ShapeSpec, all_orders: bool) -> Result<IdentitySweep> {
    let n = shape.n();
    if n > 6 {
        return Err(Error::Capacity(format!(
            "exhaustive identity sweep supports n <= 6, got {n}"
        )));
    }
    let mut tables = EdgeHeightTables::new(*shape);
    let mut sweep = IdentitySweep::default();
    for pt in enumerate_polygon_triangulations(n)? {
        for j in 0..n {
            let root = PolyEdge::new(j, (j + 1) % n, n)?;
            let orders = if all_orders {
                all_admissible_orders(&pt, &root)?
            } else {
                vec![admissible_order(&pt, &root)?]
            };
            for ao in &orders {
                let x = region_edge_sets(&pt, ao)?;
                let k = ao.order.len();
                let mut assign = vec![0u32; k];
                loop {
                    run_identity_instance(&mut tables, shape, &pt, ao, &x, &assign, &mut sweep)?;
                    // mixed-radix increment
                    let mut pos = 0;
                    loop {
                        if pos == k {
                            break;
                        }
                        assign[pos] += 1;
                        if assign[pos] < n {
                            break;
                        }
                        assign[pos] = 0;
                        pos += 1;
                    }
                    if pos == k {
                        break;
                    }
                }
            }
        }
    }
    Ok(sweep)
}

fn run_identity_instance(
    tables: &mut EdgeHeightTables,
    shape: &ShapeSpec,
    pt: &PolygonTriangulation,
    ao: &AdmissibleOrder,
    x: &RegionEdgeSets,
    assign: &[u32],
    sweep: &mut IdentitySweep,
) -> Result<()> {
    let n = shape.n();
    let apex = ApexAssignment {
        x: assign.to_vec(),
    };
    let report = alpha_eq2_cached(tables, shape, pt, ao, &apex, x)?;
    sweep.instances += 1;
    if report.alpha_eq1 != report.alpha_eq2 {
        sweep.failures += 1;
    }
    // Consistency filter: each x_i no lower than its parent across the
    // separating edge.
    let consistent = (1..ao.order.len()).all(|idx| {
        let side = interior_side(ao, idx, n).expect("interior edge");
        let t = tables.get(&ao.separating[idx], side);
        t[assign[idx] as usize] >= t[assign[ao.parent[idx]] as usize]
    });
    if consistent {
        sweep.max_alpha_consistent = sweep.max_alpha_consistent.max(report.alpha_eq1);
        if report.per_term.iter().any(|t| *t > 0) {
            sweep.failures += 1;
        }
    }
    Ok(())
}

/// Seeded random identity instances for larger n: random triangulation,
/// random root, random tree-compatible order, random assignment.
pub fn sweep_identity_random(shape: &ShapeSpec, count: u64, seed: u64) -> Result<IdentitySweep> {
    let n = shape.n();
    if n > 16 {
        return Err(Error::Capacity(format!("random identity sweep needs n <= 16, got {n}")));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut tables = EdgeHeightTables::new(*shape);
    let mut sweep = IdentitySweep::default();
    for _ in 0..count {
        let pt = random_triangulation(n, &mut rng)?;
        let j = rng.random_range(0..n);
        let root = PolyEdge::new(j, (j + 1) % n, n)?;
        let ao = random_order(&pt, &root, &mut rng)?;
        let x = region_edge_sets(&pt, &ao)?;
        let assign: Vec<u32> = (0..ao.order.len())
            .map(|_| rng.random_range(0..n))
            .collect();
        run_identity_instance(&mut tables, shape, &pt, &ao, &x, &assign, &mut sweep)?;
    }
    Ok(sweep)
}

fn random_triangulation(n: u32, rng: &mut StdRng) -> Result<PolygonTriangulation> {
    let mut diagonals = BTreeSet::new();
    let mut work: Vec<Vec<u32>> = vec![(0..n).collect()];
    while let Some(pos) = work.iter().position(|v| v.len() >= 3) {
        let verts = work.swap_remove(pos);
        let k = rng.random_range(1..verts.len() - 1);
        for d in [
            PolyEdge::new(verts[0], verts[k], n)?,
            PolyEdge::new(verts[k], *verts.last().unwrap(), n)?,
        ] {
            if !d.is_boundary(n) {
                diagonals.insert(d);
            }
        }
        work.push(verts[..=k].to_vec());
        work.push(verts[k..].to_vec());
    }
    PolygonTriangulation::new(n, diagonals)
}

fn random_order(
    pt: &PolygonTriangulation,
    root: &PolyEdge,
    rng: &mut StdRng,
) -> Result<AdmissibleOrder> {
    let canonical = admissible_order(pt, root)?;
    let k = canonical.order.len();
    // Random linear extension: repeatedly pick an unplaced triangle whose
    // parent is placed, remapping parent/separating indices as we go.
    let mut placed: Vec<usize> = vec![0];
    let mut available: Vec<usize> = (1..k).filter(|i| canonical.parent[*i] == 0).collect();
    while placed.len() < k {
        let pick = rng.random_range(0..available.len());
        let t = available.swap_remove(pick);
        placed.push(t);
        for i in 1..k {
            if canonical.parent[i] == t && !placed.contains(&i) && !available.contains(&i) {
                available.push(i);
            }
        }
    }
    let pos: HashMap<usize, usize> = placed.iter().enumerate().map(|(p, t)| (*t, p)).collect();
    let mut parent = vec![0usize; k];
    let mut separating = vec![*root; k];
    for (p, t) in placed.iter().enumerate().skip(1) {
        parent[p] = pos[&canonical.parent[*t]];
        separating[p] = canonical.separating[*t];
    }
    Ok(AdmissibleOrder {
        root_edge: *root,
        order: placed.iter().map(|t| canonical.order[*t]).collect(),
        parent,
        separating,
    })
}

/// Monotone-lemma sweep over all interior chords and both sides.
pub fn sweep_monotone(shape: &ShapeSpec) -> Result<(u64, u64)> {
    let n = shape.n();
    let mut instances = 0;
    let mut failures = 0;
    for a in 0..n {
        for b in a + 1..n {
            let chord = Chord::new(Layer::Top, a, b, n)?;
            if chord.is_boundary(n) {
                continue;
            }
            for side in [Side::ArcAb, Side::ArcBa] {
                instances += 1;
                if !check_monotone_lemma(shape, &chord, side)? {
                    failures += 1;
                }
            }
        }
    }
    Ok((instances, failures))
}
