//! Exact geometric predicates and validity checking for triangulations of
//! the prism and antiprism, with no coordinates on any trusted path.
//!
//! # Closed-form orientation
//!
//! Place the top polygon's vertex k at angle 2k*pi/n and height 1, the
//! bottom polygon's vertex k at angle (2k + offset)*pi/n and height 0
//! (offset 1 for the antiprism), circumradius 1. For four distinct vertices
//! listed in canonical order (top layer first, ascending index) the sign of
//! the orientation determinant det[q-p, r-p, s-p] is:
//!
//! * four in one layer: 0 (coplanar);
//! * three in one layer plus one in the other: -1. The in-layer triple
//!   (i < j < k) is counterclockwise on its circle, and eliminating the
//!   height column leaves -ccw = -1 regardless of which layer holds the
//!   triple;
//! * two top {i < j} plus two bottom {k < l}: the rows reduce to the cross
//!   product of the two chord directions, whose sign is the sign of
//!   sin((k + l + offset - i - j) * pi / n). With the residue
//!   rho = (k + l + offset - i - j) mod 2n this is 0 for rho in {0, n},
//!   +1 for 0 < rho < n and -1 otherwise. The zero case is exactly the
//!   parallel-chords rule.
//!
//! Arbitrary argument orders are reduced to the canonical one by counting
//! the sorting permutation's parity. The three cases are cross-validated
//! against a 100-digit numeric determinant in the test suites.
//!
//! # Proper intersections via circuits
//!
//! Two tetrahedra intersect properly (their intersection is a common face,
//! possibly empty) iff no circuit -- minimal affinely dependent subset --
//! of their combined vertices has its positive part inside one tet and its
//! negative part inside the other. Since no two solid vertices coincide and
//! no three are collinear, circuits have four coplanar points or five
//! spanning points, and their signs are cofactor orientation signs. A
//! coplanar quadruple borrows an off-plane witness vertex so that its
//! in-plane cofactors become 3D orientation calls.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::polygon::{PolygonTriangulation, Triangle};
use crate::shape::{Kind, Layer, PointId, ShapeSpec};

/// A tetrahedron on the solid's vertices, stored in canonical sorted order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Tet {
    pts: [PointId; 4],
}

impl Tet {
    pub fn new(mut pts: [PointId; 4]) -> Result<Tet> {
        pts.sort_unstable();
        if pts.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("tetrahedron vertices must be distinct".into()));
        }
        Ok(Tet { pts })
    }

    pub fn points(&self) -> &[PointId; 4] {
        &self.pts
    }

    pub fn contains(&self, p: &PointId) -> bool {
        self.pts.contains(p)
    }

    /// The facet opposite vertex `i` (sorted) plus that apex.
    pub fn facet(&self, i: usize) -> ([PointId; 3], PointId) {
        let mut tri = [self.pts[0]; 3];
        let mut k = 0;
        for (j, p) in self.pts.iter().enumerate() {
            if j != i {
                tri[k] = *p;
                k += 1;
            }
        }
        (tri, self.pts[i])
    }
}

impl fmt::Display for Tet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-{}-{}-{}",
            self.pts[0], self.pts[1], self.pts[2], self.pts[3]
        )
    }
}

/// A set of tetrahedra claimed to triangulate the solid. Validity is
/// established by [`validate_triangulation`], not by construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Triangulation3D {
    pub shape: ShapeSpec,
    pub tets: Vec<Tet>,
}

impl Triangulation3D {
    /// Canonicalizes the tet list (sorted; duplicates kept so that the
    /// validator can flag them).
    pub fn new(shape: ShapeSpec, mut tets: Vec<Tet>) -> Self {
        tets.sort_unstable();
        Triangulation3D { shape, tets }
    }

    pub fn size(&self) -> usize {
        self.tets.len()
    }
}

/// Number of (top, bottom) vertices of a tet: (3,1), (2,2) or (1,3) for
/// non-degenerate tets.
pub fn classify_tet(t: &Tet) -> (u8, u8) {
    let tops = t.pts.iter().filter(|p| p.layer == Layer::Top).count() as u8;
    (tops, 4 - tops)
}

/// Sign of the 3D orientation determinant of four distinct vertices.
pub fn orient(shape: &ShapeSpec, p: PointId, q: PointId, r: PointId, s: PointId) -> Result<i8> {
    let pts = [p, q, r, s];
    let n = shape.n();
    for v in &pts {
        if v.index >= n {
            return Err(Error::Domain(format!("vertex {v} out of range for n = {n}")));
        }
    }
    for i in 0..4 {
        for j in i + 1..4 {
            if pts[i] == pts[j] {
                return Err(Error::Domain(format!("repeated vertex {}", pts[i])));
            }
        }
    }
    Ok(orient4(shape, &pts))
}

/// Orientation sign for possibly-repeated arguments (0 on repeats).
pub(crate) fn orient4(shape: &ShapeSpec, pts: &[PointId; 4]) -> i8 {
    let mut v = *pts;
    // Insertion sort, counting swaps for the permutation parity.
    let mut sign: i8 = 1;
    for i in 1..4 {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return 0;
    }
    let tops = v.iter().filter(|p| p.layer == Layer::Top).count();
    match tops {
        0 | 4 => 0,
        1 | 3 => -sign,
        2 => {
            // v is sorted, so v[0], v[1] are top {i < j} and v[2], v[3] are
            // bottom {k < l}.
            let n = shape.n();
            let (i, j) = (v[0].index, v[1].index);
            let (k, l) = (v[2].index, v[3].index);
            let rho = (k + l + shape.offset() + 4 * n - i - j) % (2 * n);
            if rho == 0 || rho == n {
                0
            } else if rho < n {
                sign
            } else {
                -sign
            }
        }
        _ => unreachable!(),
    }
}

/// All non-degenerate tetrahedra on the solid's vertices, classified and in
/// canonical lexicographic order.
pub fn candidate_tets(shape: &ShapeSpec) -> Result<Vec<Tet>> {
    if shape.n() > 16 {
        return Err(Error::Capacity(format!(
            "candidate enumeration supports n <= 16, got {}",
            shape.n()
        )));
    }
    let pts: Vec<PointId> = shape.vertices().collect();
    let m = pts.len();
    let mut out = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                for d in c + 1..m {
                    let quad = [pts[a], pts[b], pts[c], pts[d]];
                    if orient4(shape, &quad) != 0 {
                        out.push(Tet { pts: quad });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Signed circuit (Radon partition) of a minimal affinely dependent subset.
#[derive(Clone, Debug)]
struct Circuit {
    pos: Vec<PointId>,
    neg: Vec<PointId>,
}

impl Circuit {
    fn violates(&self, s: &Tet, t: &Tet) -> bool {
        let inside = |side: &[PointId], tet: &Tet| side.iter().all(|p| tet.contains(p));
        (inside(&self.pos, s) && inside(&self.neg, t))
            || (inside(&self.pos, t) && inside(&self.neg, s))
    }
}

/// Circuit of a coplanar quadruple, via an off-plane witness vertex.
fn coplanar_circuit(shape: &ShapeSpec, quad: &[PointId; 4]) -> Circuit {
    let w = shape
        .vertices()
        .find(|w| {
            !quad.contains(w) && orient4(shape, &[quad[0], quad[1], quad[2], *w]) != 0
        })
        .expect("solid is 3-dimensional");
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for i in 0..4 {
        let mut rest = [w; 4];
        let mut k = 0;
        for (j, p) in quad.iter().enumerate() {
            if j != i {
                rest[k] = *p;
                k += 1;
            }
        }
        rest[3] = w;
        let mut lambda = orient4(shape, &rest);
        if i % 2 == 1 {
            lambda = -lambda;
        }
        debug_assert_ne!(lambda, 0, "no three solid vertices are collinear");
        if lambda > 0 {
            pos.push(quad[i]);
        } else {
            neg.push(quad[i]);
        }
    }
    debug_assert!(!pos.is_empty() && !neg.is_empty());
    Circuit { pos, neg }
}

/// Circuit of a spanning 5-point subset, or None if the dependence is
/// supported on fewer points (some cofactor vanishes).
fn spanning_circuit(shape: &ShapeSpec, quint: &[PointId; 5]) -> Option<Circuit> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for i in 0..5 {
        let mut rest = [quint[0]; 4];
        let mut k = 0;
        for (j, p) in quint.iter().enumerate() {
            if j != i {
                rest[k] = *p;
                k += 1;
            }
        }
        let mut lambda = orient4(shape, &rest);
        if i % 2 == 1 {
            lambda = -lambda;
        }
        if lambda == 0 {
            return None;
        }
        if lambda > 0 {
            pos.push(quint[i]);
        } else {
            neg.push(quint[i]);
        }
    }
    debug_assert!(!pos.is_empty() && !neg.is_empty());
    Some(Circuit { pos, neg })
}

/// Whether two non-degenerate tets intersect in a common (possibly empty)
/// face, decided by the circuit criterion over their combined vertices.
pub fn proper_pair(shape: &ShapeSpec, s: &Tet, t: &Tet) -> bool {
    let mut u: Vec<PointId> = s.pts.iter().chain(t.pts.iter()).copied().collect();
    u.sort_unstable();
    u.dedup();
    if u.len() <= 4 {
        return true; // identical tets
    }
    let m = u.len();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                for d in c + 1..m {
                    let quad = [u[a], u[b], u[c], u[d]];
                    if orient4(shape, &quad) != 0 {
                        continue;
                    }
                    if coplanar_circuit(shape, &quad).violates(s, t) {
                        return false;
                    }
                }
            }
        }
    }
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                for d in c + 1..m {
                    for e in d + 1..m {
                        let quint = [u[a], u[b], u[c], u[d], u[e]];
                        if let Some(circ) = spanning_circuit(shape, &quint) {
                            if circ.violates(s, t) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    true
}

/// Boundary 2-faces of the solid a triangle facet can lie in.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BoundaryFace {
    Top,
    Bottom,
    /// Prism side quadrilateral {T_a, T_{a+1}, B_a, B_{a+1}}.
    Quad(u32),
    /// Antiprism side triangle {T_a, T_{a+1}, B_a}.
    SideUp(u32),
    /// Antiprism side triangle {B_a, B_{a+1}, T_{a+1}}.
    SideDown(u32),
}

/// Combinatorial classification of a facet into a boundary 2-face, or None
/// if the facet is interior.
pub fn boundary_face_of(shape: &ShapeSpec, tri: &[PointId; 3]) -> Option<BoundaryFace> {
    let n = shape.n();
    let tops: Vec<u32> = tri
        .iter()
        .filter(|p| p.layer == Layer::Top)
        .map(|p| p.index)
        .collect();
    let bots: Vec<u32> = tri
        .iter()
        .filter(|p| p.layer == Layer::Bottom)
        .map(|p| p.index)
        .collect();
    if bots.is_empty() {
        return Some(BoundaryFace::Top);
    }
    if tops.is_empty() {
        return Some(BoundaryFace::Bottom);
    }
    // Cyclically adjacent pair {a, a+1 mod n}, reported as a.
    let adjacent = |x: u32, y: u32| -> Option<u32> {
        let (lo, hi) = (x.min(y), x.max(y));
        if hi == lo + 1 {
            Some(lo)
        } else if lo == 0 && hi == n - 1 {
            Some(n - 1)
        } else {
            None
        }
    };
    match shape.kind() {
        Kind::Prism => {
            let mut idx: Vec<u32> = tri.iter().map(|p| p.index).collect();
            idx.sort_unstable();
            idx.dedup();
            if idx.len() != 2 {
                return None;
            }
            adjacent(idx[0], idx[1]).map(BoundaryFace::Quad)
        }
        Kind::Antiprism => {
            if tops.len() == 2 {
                let a = adjacent(tops[0], tops[1])?;
                (bots[0] == a).then_some(BoundaryFace::SideUp(a))
            } else {
                let a = adjacent(bots[0], bots[1])?;
                (tops[0] == (a + 1) % n).then_some(BoundaryFace::SideDown(a))
            }
        }
    }
}

/// Validity failure codes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FailureCode {
    DegenerateTet,
    ImproperPair,
    UnmatchedFacet,
    BoundaryLeak,
    FaceNotTiled,
    Disconnected,
}

impl fmt::Display for FailureCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FailureCode::DegenerateTet => "degenerate-tet",
            FailureCode::ImproperPair => "improper-pair",
            FailureCode::UnmatchedFacet => "unmatched-facet",
            FailureCode::BoundaryLeak => "boundary-leak",
            FailureCode::FaceNotTiled => "face-not-tiled",
            FailureCode::Disconnected => "disconnected",
        };
        write!(f, "{s}")
    }
}

/// Outcome of a validity check, with one witness per failure.
#[derive(Clone, Debug, Default)]
pub struct ValidityReport {
    pub failures: Vec<(FailureCode, String)>,
}

impl ValidityReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn has(&self, code: FailureCode) -> bool {
        self.failures.iter().any(|(c, _)| *c == code)
    }

    fn push(&mut self, code: FailureCode, witness: impl Into<String>) {
        self.failures.push((code, witness.into()));
    }
}

/// How the validator decides pairwise properness.
enum PairCheck {
    /// Local circuit enumeration per pair; fully independent, O(pairs).
    Local,
    /// Precomputed compatibility matrix from the search tables. Used by the
    /// enumerator's per-leaf re-validation; the matrix itself is tested
    /// against the local route.
    Matrix(Arc<SearchTables>),
}

/// Reusable validity checker for one shape.
pub struct Validator {
    shape: ShapeSpec,
    pairs: PairCheck,
}

impl Validator {
    pub fn new(shape: ShapeSpec) -> Validator {
        Validator {
            shape,
            pairs: PairCheck::Local,
        }
    }

    pub(crate) fn with_tables(tables: Arc<SearchTables>) -> Validator {
        Validator {
            shape: tables.shape,
            pairs: PairCheck::Matrix(tables),
        }
    }

    fn pair_ok(&self, s: &Tet, t: &Tet) -> bool {
        match &self.pairs {
            PairCheck::Local => proper_pair(&self.shape, s, t),
            PairCheck::Matrix(tab) => match (tab.index.get(s), tab.index.get(t)) {
                (Some(&a), Some(&b)) => tab.compatible(a, b),
                _ => proper_pair(&self.shape, s, t),
            },
        }
    }

    /// Full validity check: non-degeneracy, pairwise properness, facet
    /// matching, boundary-face tiling and connectivity. Never panics on
    /// malformed input.
    pub fn validate(&self, tets: &[Tet]) -> ValidityReport {
        let shape = self.shape;
        let n = shape.n();
        let mut report = ValidityReport::default();
        if tets.is_empty() {
            report.push(FailureCode::FaceNotTiled, "empty tetrahedron set");
            return report;
        }

        // (i) degeneracy and index range
        let mut well_formed = Vec::new();
        for t in tets {
            if t.pts.iter().any(|p| p.index >= n) {
                report.push(FailureCode::DegenerateTet, format!("{t}: index out of range"));
                continue;
            }
            if orient4(&shape, &t.pts) == 0 {
                report.push(FailureCode::DegenerateTet, format!("{t}: coplanar"));
                continue;
            }
            well_formed.push(*t);
        }

        // duplicates count as improper pairs
        let mut sorted = well_formed.clone();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                report.push(FailureCode::ImproperPair, format!("duplicate tet {}", w[0]));
            }
        }
        sorted.dedup();
        let tets = sorted;

        // (ii) pairwise properness
        for i in 0..tets.len() {
            for j in i + 1..tets.len() {
                if !self.pair_ok(&tets[i], &tets[j]) {
                    report.push(
                        FailureCode::ImproperPair,
                        format!("{} vs {}", tets[i], tets[j]),
                    );
                }
            }
        }

        // (iii) facet census
        let mut census: HashMap<[PointId; 3], Vec<usize>> = HashMap::new();
        for (ti, t) in tets.iter().enumerate() {
            for i in 0..4 {
                let (tri, _) = t.facet(i);
                census.entry(tri).or_default().push(ti);
            }
        }
        for (tri, owners) in &census {
            let fmt_tri = || format!("{}-{}-{}", tri[0], tri[1], tri[2]);
            match boundary_face_of(&shape, tri) {
                Some(_) => {
                    if owners.len() != 1 {
                        report.push(
                            FailureCode::BoundaryLeak,
                            format!("boundary facet {} in {} tets", fmt_tri(), owners.len()),
                        );
                    }
                }
                None => {
                    if owners.len() != 2 {
                        report.push(
                            FailureCode::UnmatchedFacet,
                            format!("interior facet {} in {} tets", fmt_tri(), owners.len()),
                        );
                    }
                }
            }
        }

        // (iv) each boundary 2-face is exactly tiled
        self.check_face_tilings(&tets, &census, &mut report);

        // (v) connectivity of the facet-adjacency graph
        if tets.len() > 1 {
            let mut adj = vec![Vec::new(); tets.len()];
            for owners in census.values() {
                if owners.len() == 2 {
                    adj[owners[0]].push(owners[1]);
                    adj[owners[1]].push(owners[0]);
                }
            }
            let mut seen = vec![false; tets.len()];
            let mut stack = vec![0usize];
            seen[0] = true;
            let mut reached = 1;
            while let Some(v) = stack.pop() {
                for w in &adj[v] {
                    if !seen[*w] {
                        seen[*w] = true;
                        reached += 1;
                        stack.push(*w);
                    }
                }
            }
            if reached != tets.len() {
                report.push(
                    FailureCode::Disconnected,
                    format!("{} of {} tets reachable", reached, tets.len()),
                );
            }
        }

        report
    }

    fn check_face_tilings(
        &self,
        tets: &[Tet],
        census: &HashMap<[PointId; 3], Vec<usize>>,
        report: &mut ValidityReport,
    ) {
        let shape = self.shape;
        let n = shape.n();
        let mut top = Vec::new();
        let mut bottom = Vec::new();
        let mut quads: HashMap<u32, Vec<[PointId; 3]>> = HashMap::new();
        let mut side_up: HashSet<u32> = HashSet::new();
        let mut side_down: HashSet<u32> = HashSet::new();
        for tri in census.keys() {
            match boundary_face_of(&shape, tri) {
                Some(BoundaryFace::Top) => top.push(Triangle::new([
                    tri[0].index,
                    tri[1].index,
                    tri[2].index,
                ])),
                Some(BoundaryFace::Bottom) => bottom.push(Triangle::new([
                    tri[0].index,
                    tri[1].index,
                    tri[2].index,
                ])),
                Some(BoundaryFace::Quad(a)) => quads.entry(a).or_default().push(*tri),
                Some(BoundaryFace::SideUp(a)) => {
                    side_up.insert(a);
                }
                Some(BoundaryFace::SideDown(a)) => {
                    side_down.insert(a);
                }
                None => {}
            }
        }
        let _ = tets;
        if PolygonTriangulation::from_triangles(n, &top).is_err() {
            report.push(FailureCode::FaceNotTiled, "top polygon face");
        }
        if PolygonTriangulation::from_triangles(n, &bottom).is_err() {
            report.push(FailureCode::FaceNotTiled, "bottom polygon face");
        }
        match shape.kind() {
            Kind::Prism => {
                for a in 0..n {
                    let b = (a + 1) % n;
                    let (ta, tb) = (PointId::top(a), PointId::top(b));
                    let (ba, bb) = (PointId::bottom(a), PointId::bottom(b));
                    let sort3 = |mut t: [PointId; 3]| {
                        t.sort_unstable();
                        t
                    };
                    let split1 = BTreeSet::from([sort3([ta, tb, ba]), sort3([tb, ba, bb])]);
                    let split2 = BTreeSet::from([sort3([ta, tb, bb]), sort3([ta, ba, bb])]);
                    let got: BTreeSet<[PointId; 3]> =
                        quads.get(&a).map(|v| v.iter().copied().collect()).unwrap_or_default();
                    if got != split1 && got != split2 {
                        report.push(FailureCode::FaceNotTiled, format!("side quad {a}"));
                    }
                }
            }
            Kind::Antiprism => {
                for a in 0..n {
                    if !side_up.contains(&a) {
                        report.push(FailureCode::FaceNotTiled, format!("side face up {a}"));
                    }
                    if !side_down.contains(&a) {
                        report.push(FailureCode::FaceNotTiled, format!("side face down {a}"));
                    }
                }
            }
        }
    }
}

/// One-shot validity check (builds a local validator).
pub fn validate_triangulation(tri: &Triangulation3D) -> ValidityReport {
    Validator::new(tri.shape).validate(&tri.tets)
}

/// Encoded facet id: three point codes, 5 bits each, sorted ascending, so
/// ordering by id is the lexicographic order on sorted point triples.
pub(crate) type FacetId = u16;

pub(crate) fn facet_id(shape: &ShapeSpec, tri: &[PointId; 3]) -> FacetId {
    let n = shape.n();
    let mut c = [tri[0].code(n), tri[1].code(n), tri[2].code(n)];
    c.sort_unstable();
    ((c[0] << 10) | (c[1] << 5) | c[2]) as FacetId
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct TetFacet {
    pub fid: FacetId,
    /// Orientation sign of the owning tet's apex over the sorted facet.
    pub side: i8,
    pub boundary: bool,
}

/// Precomputed per-shape search tables: candidate tets, the pairwise
/// compatibility matrix (derived from a single global circuit sweep) and
/// facet incidences.
pub(crate) struct SearchTables {
    pub shape: ShapeSpec,
    pub cands: Vec<Tet>,
    pub index: HashMap<Tet, u32>,
    pub words: usize,
    pub compat: Vec<Box<[u64]>>,
    pub facets: Vec<[TetFacet; 4]>,
    pub incidence: HashMap<FacetId, Vec<(u32, i8)>>,
}

impl SearchTables {
    pub fn new(shape: ShapeSpec) -> Result<Arc<SearchTables>> {
        let cands = candidate_tets(&shape)?;
        let m = cands.len();
        let words = m.div_ceil(64);
        let index: HashMap<Tet, u32> = cands
            .iter()
            .enumerate()
            .map(|(i, t)| (*t, i as u32))
            .collect();

        // Bitmask of candidates containing each point.
        let points: Vec<PointId> = shape.vertices().collect();
        let point_pos: HashMap<PointId, usize> =
            points.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let mut point_rows = vec![vec![0u64; words].into_boxed_slice(); points.len()];
        for (ci, t) in cands.iter().enumerate() {
            for p in t.points() {
                point_rows[point_pos[p]][ci / 64] |= 1u64 << (ci % 64);
            }
        }

        let mut improper = vec![vec![0u64; words].into_boxed_slice(); m];
        let mark = |circ: &Circuit, improper: &mut Vec<Box<[u64]>>| {
            let mask_of = |side: &[PointId]| {
                let mut mask = vec![u64::MAX; words].into_boxed_slice();
                if let Some(last) = mask.last_mut() {
                    let rem = m % 64;
                    if rem != 0 {
                        *last = (1u64 << rem) - 1;
                    }
                }
                for p in side {
                    for (w, row) in mask.iter_mut().zip(point_rows[point_pos[p]].iter()) {
                        *w &= row;
                    }
                }
                mask
            };
            let a_mask = mask_of(&circ.pos);
            let b_mask = mask_of(&circ.neg);
            for (a, b) in [(&a_mask, &b_mask), (&b_mask, &a_mask)] {
                for wi in 0..words {
                    let mut bits = a[wi];
                    while bits != 0 {
                        let bit = bits.trailing_zeros() as usize;
                        let ci = wi * 64 + bit;
                        for (dst, src) in improper[ci].iter_mut().zip(b.iter()) {
                            *dst |= src;
                        }
                        bits &= bits - 1;
                    }
                }
            }
        };

        // Global circuit sweep: coplanar quadruples, then spanning 5-sets.
        let mp = points.len();
        for a in 0..mp {
            for b in a + 1..mp {
                for c in b + 1..mp {
                    for d in c + 1..mp {
                        let quad = [points[a], points[b], points[c], points[d]];
                        if orient4(&shape, &quad) == 0 {
                            mark(&coplanar_circuit(&shape, &quad), &mut improper);
                        }
                    }
                }
            }
        }
        for a in 0..mp {
            for b in a + 1..mp {
                for c in b + 1..mp {
                    for d in c + 1..mp {
                        for e in d + 1..mp {
                            let quint =
                                [points[a], points[b], points[c], points[d], points[e]];
                            if let Some(circ) = spanning_circuit(&shape, &quint) {
                                mark(&circ, &mut improper);
                            }
                        }
                    }
                }
            }
        }

        let mut compat = improper;
        for (ci, row) in compat.iter_mut().enumerate() {
            for (wi, w) in row.iter_mut().enumerate() {
                let mut valid = u64::MAX;
                let base = wi * 64;
                if base + 64 > m {
                    valid = if m > base { (1u64 << (m - base)) - 1 } else { 0 };
                }
                *w = !*w & valid;
            }
            row[ci / 64] |= 1u64 << (ci % 64);
        }

        // Facet incidence.
        let mut facets = Vec::with_capacity(m);
        let mut incidence: HashMap<FacetId, Vec<(u32, i8)>> = HashMap::new();
        for (ci, t) in cands.iter().enumerate() {
            let mut fs = [TetFacet {
                fid: 0,
                side: 0,
                boundary: false,
            }; 4];
            for i in 0..4 {
                let (tri, apex) = t.facet(i);
                let fid = facet_id(&shape, &tri);
                let side = orient4(&shape, &[tri[0], tri[1], tri[2], apex]);
                debug_assert_ne!(side, 0);
                let boundary = boundary_face_of(&shape, &tri).is_some();
                fs[i] = TetFacet {
                    fid,
                    side,
                    boundary,
                };
                incidence.entry(fid).or_default().push((ci as u32, side));
            }
            facets.push(fs);
        }

        Ok(Arc::new(SearchTables {
            shape,
            cands,
            index,
            words,
            compat,
            facets,
            incidence,
        }))
    }

    pub fn compatible(&self, a: u32, b: u32) -> bool {
        self.compat[a as usize][b as usize / 64] >> (b as usize % 64) & 1 == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prism(n: u32) -> ShapeSpec {
        ShapeSpec::prism(n).unwrap()
    }

    fn antiprism(n: u32) -> ShapeSpec {
        ShapeSpec::antiprism(n).unwrap()
    }

    fn tet(pts: [PointId; 4]) -> Tet {
        Tet::new(pts).unwrap()
    }

    fn t(i: u32) -> PointId {
        PointId::top(i)
    }

    fn b(i: u32) -> PointId {
        PointId::bottom(i)
    }

    #[test]
    fn orient_coplanar_layers() {
        for n in 4..=8 {
            let shape = prism(n);
            assert_eq!(orient(&shape, t(0), t(1), t(2), t(3)).unwrap(), 0);
            assert_eq!(orient(&shape, b(0), b(1), b(2), b(3)).unwrap(), 0);
        }
    }

    #[test]
    fn orient_parallel_chords_are_coplanar() {
        let shape = prism(4);
        assert_eq!(orient(&shape, t(0), t(1), b(2), b(3)).unwrap(), 0);
        // Vertically stacked chords.
        assert_eq!(orient(&shape, t(0), t(2), b(0), b(2)).unwrap(), 0);
        // Antiprism rule: k + l + 1 = i + j (mod n).
        let shape = antiprism(3);
        assert_eq!(orient(&shape, t(1), t(2), b(0), b(2)).unwrap(), 0);
        assert_ne!(orient(&shape, t(0), t(1), b(0), b(2)).unwrap(), 0);
    }

    #[test]
    fn orient_mixed_triples_nonzero() {
        for n in 3..=8 {
            let shape = prism(n);
            assert_ne!(orient(&shape, t(0), t(1), t(2), b(0)).unwrap(), 0);
        }
    }

    #[test]
    fn orient_alternating() {
        let shape = prism(5);
        let pts = [t(0), t(2), b(1), b(4)];
        let base = orient4(&shape, &pts);
        assert_ne!(base, 0);
        let mut swapped = pts;
        swapped.swap(1, 3);
        assert_eq!(orient4(&shape, &swapped), -base);
        let mut rotated = pts;
        rotated.rotate_left(1); // 3-cycle = even permutation... of 4 elements rotate_left is odd
        assert_eq!(orient4(&shape, &rotated), -base);
    }

    #[test]
    fn orient_rejects_repeats() {
        let shape = prism(4);
        assert!(orient(&shape, t(0), t(0), t(1), b(0)).is_err());
        assert!(orient(&shape, t(0), t(5), t(1), b(0)).is_err());
    }

    #[test]
    fn orient_rotation_and_reflection_symmetry() {
        for shape in [prism(5), prism(6), antiprism(4), antiprism(5)] {
            let n = shape.n();
            let rotate = |p: PointId| PointId::new(p.layer, p.index + 1, n);
            let reflect = |p: PointId| match p.layer {
                Layer::Top => PointId::new(p.layer, n - p.index % n, n),
                // Bottom angle 2k + off maps to -(2k + off) = 2(n - k) - off;
                // for the antiprism that is index n - 1 - k, for the prism n - k.
                Layer::Bottom => {
                    PointId::new(p.layer, 2 * n - p.index - shape.offset(), n)
                }
            };
            let pts: Vec<PointId> = shape.vertices().collect();
            let mut checked = 0;
            for a in 0..pts.len() {
                for bb in a + 1..pts.len() {
                    for c in bb + 1..pts.len() {
                        for d in c + 1..pts.len() {
                            let q = [pts[a], pts[bb], pts[c], pts[d]];
                            let o = orient4(&shape, &q);
                            let qr = [rotate(q[0]), rotate(q[1]), rotate(q[2]), rotate(q[3])];
                            assert_eq!(o, orient4(&shape, &qr), "rotation {q:?}");
                            let qf = [reflect(q[0]), reflect(q[1]), reflect(q[2]), reflect(q[3])];
                            assert_eq!(o, -orient4(&shape, &qf), "reflection {q:?}");
                            checked += 1;
                        }
                    }
                }
            }
            assert!(checked > 0);
        }
    }

    #[test]
    fn candidate_counts_small() {
        // Triangular prism: 15 subsets, 3 parallel 2+2 pairs excluded.
        assert_eq!(candidate_tets(&prism(3)).unwrap().len(), 12);
        // Octahedron: 15 subsets minus the 3 equatorial squares.
        assert_eq!(candidate_tets(&antiprism(3)).unwrap().len(), 12);
        // Square prism (cube): 70 - 2 same-layer - 10 parallel pairs.
        assert_eq!(candidate_tets(&prism(4)).unwrap().len(), 58);
        assert!(candidate_tets(&prism(17)).is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_tet(&tet([t(0), t(1), t(2), b(5.min(2))])), (3, 1));
        assert_eq!(classify_tet(&tet([t(0), t(2), b(1), b(3)])), (2, 2));
        assert_eq!(classify_tet(&tet([t(4), b(0), b(1), b(2)])), (1, 3));
    }

    #[test]
    fn proper_pair_shared_facet() {
        // Two tets over the same top triangle with bottom apexes on opposite
        // sides of it share a facet properly; same-side overlap is improper.
        let shape = prism(4);
        let s = tet([t(0), t(1), t(2), b(0)]);
        let improper = tet([t(0), t(1), t(2), b(1)]);
        assert!(!proper_pair(&shape, &s, &improper));
        let share = tet([t(0), t(2), t(3), b(0)]);
        assert!(proper_pair(&shape, &s, &share));
        assert!(!proper_pair(&shape, &improper, &s), "symmetry");
    }

    #[test]
    fn proper_pair_disjoint() {
        let shape = prism(6);
        let s = tet([t(0), t(1), b(0), b(1)]);
        let t2 = tet([t(3), t(4), b(3), b(4)]);
        assert!(proper_pair(&shape, &s, &t2));
        assert!(proper_pair(&shape, &s, &s));
    }

    #[test]
    fn matrix_matches_local_properness() {
        for shape in [prism(3), prism(4), antiprism(3)] {
            let tables = SearchTables::new(shape).unwrap();
            let m = tables.cands.len();
            for a in 0..m {
                for b2 in a..m {
                    let local = proper_pair(&shape, &tables.cands[a], &tables.cands[b2]);
                    assert_eq!(
                        tables.compatible(a as u32, b2 as u32),
                        local,
                        "{} vs {}",
                        tables.cands[a],
                        tables.cands[b2]
                    );
                    assert_eq!(
                        tables.compatible(b2 as u32, a as u32),
                        local,
                        "matrix symmetry"
                    );
                }
            }
        }
    }

    #[test]
    fn boundary_face_classification() {
        let shape = prism(4);
        assert_eq!(
            boundary_face_of(&shape, &[t(0), t(1), t(3)]),
            Some(BoundaryFace::Top)
        );
        assert_eq!(
            boundary_face_of(&shape, &[t(0), t(1), b(0)]),
            Some(BoundaryFace::Quad(0))
        );
        assert_eq!(
            boundary_face_of(&shape, &[t(3), t(0), b(3)]),
            Some(BoundaryFace::Quad(3))
        );
        assert_eq!(boundary_face_of(&shape, &[t(0), t(2), b(0)]), None);
        assert_eq!(boundary_face_of(&shape, &[t(0), t(1), b(2)]), None);
        let shape = antiprism(3);
        assert_eq!(
            boundary_face_of(&shape, &[t(0), t(1), b(0)]),
            Some(BoundaryFace::SideUp(0))
        );
        assert_eq!(
            boundary_face_of(&shape, &[b(0), b(1), t(1)]),
            Some(BoundaryFace::SideDown(0))
        );
        assert_eq!(
            boundary_face_of(&shape, &[t(0), t(2), b(2)]),
            Some(BoundaryFace::SideUp(2))
        );
        assert_eq!(boundary_face_of(&shape, &[t(0), t(1), b(1)]), None);
    }

    #[test]
    fn staircase_triangular_prism_validates() {
        let shape = prism(3);
        let tri = Triangulation3D::new(
            shape,
            vec![
                tet([t(0), t(1), t(2), b(2)]),
                tet([t(0), t(1), b(1), b(2)]),
                tet([t(0), b(0), b(1), b(2)]),
            ],
        );
        let report = validate_triangulation(&tri);
        assert!(report.ok(), "{:?}", report.failures);
    }

    #[test]
    fn single_tet_fails_tiling() {
        let shape = prism(4);
        let tri = Triangulation3D::new(shape, vec![tet([t(0), t(1), t(2), b(0)])]);
        let report = validate_triangulation(&tri);
        assert!(!report.ok());
        assert!(
            report.has(FailureCode::FaceNotTiled) || report.has(FailureCode::UnmatchedFacet)
        );
    }

    #[test]
    fn square_prism_maximal_witness_validates() {
        let shape = prism(4);
        let tri = Triangulation3D::new(
            shape,
            vec![
                tet([t(0), t(1), t(2), b(0)]),
                tet([t(0), t(2), t(3), b(0)]),
                tet([t(1), t(2), b(0), b(1)]),
                tet([t(2), t(3), b(0), b(3)]),
                tet([t(2), b(0), b(1), b(2)]),
                tet([t(2), b(0), b(2), b(3)]),
            ],
        );
        let report = validate_triangulation(&tri);
        assert!(report.ok(), "{:?}", report.failures);
        let mut counts = HashMap::new();
        for t in &tri.tets {
            *counts.entry(classify_tet(t)).or_insert(0) += 1;
        }
        assert_eq!(counts[&(3, 1)], 2);
        assert_eq!(counts[&(1, 3)], 2);
        assert_eq!(counts[&(2, 2)], 2);
    }

    #[test]
    fn removing_a_tet_is_detected() {
        let shape = prism(3);
        let mut tets = vec![
            tet([t(0), t(1), t(2), b(2)]),
            tet([t(0), t(1), b(1), b(2)]),
            tet([t(0), b(0), b(1), b(2)]),
        ];
        tets.remove(1);
        let report = validate_triangulation(&Triangulation3D::new(shape, tets));
        assert!(report.has(FailureCode::UnmatchedFacet));
    }

    #[test]
    fn duplicate_tet_is_improper() {
        let shape = prism(3);
        let tets = vec![
            tet([t(0), t(1), t(2), b(2)]),
            tet([t(0), t(1), t(2), b(2)]),
            tet([t(0), t(1), b(1), b(2)]),
            tet([t(0), b(0), b(1), b(2)]),
        ];
        let report = validate_triangulation(&Triangulation3D::new(shape, tets));
        assert!(report.has(FailureCode::ImproperPair));
    }

    #[test]
    fn degenerate_tet_is_detected() {
        let shape = prism(4);
        let tets = vec![tet([t(0), t(1), t(2), t(3)])];
        let report = validate_triangulation(&Triangulation3D::new(shape, tets));
        assert!(report.has(FailureCode::DegenerateTet));
    }
}
