//! Combinatorial model of two stacked regular n-gons.
//!
//! All geometry in this module is reduced to integer arithmetic on angle
//! multiples of pi/n. A vertex of the solid sits at an integral "angle unit"
//! (top vertex k at `2k`, bottom vertex k at `2k + offset`, offset 1 for the
//! antiprism), and every comparison of linear-functional values along a chord
//! reduces to comparing folded angular distances, because cosine is strictly
//! monotone on [0, pi]. No real arithmetic appears on any trusted path.

use std::fmt;

use crate::error::{Error, Result};

/// Which solid is being modelled.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Kind {
    Prism,
    Antiprism,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Prism => write!(f, "prism"),
            Kind::Antiprism => write!(f, "antiprism"),
        }
    }
}

/// The solid under study: a prism or antiprism over a regular n-gon.
///
/// This is the sole global parameter of the toolkit. The bottom polygon is
/// rotated by pi/n relative to the top one exactly when the kind is
/// `Antiprism` (offset 1).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ShapeSpec {
    kind: Kind,
    n: u32,
}

impl ShapeSpec {
    pub fn new(kind: Kind, n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("n must be at least 3, got {n}")));
        }
        Ok(ShapeSpec { kind, n })
    }

    pub fn prism(n: u32) -> Result<Self> {
        Self::new(Kind::Prism, n)
    }

    pub fn antiprism(n: u32) -> Result<Self> {
        Self::new(Kind::Antiprism, n)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Rotation offset of the bottom polygon in units of pi/n.
    pub fn offset(&self) -> u32 {
        match self.kind {
            Kind::Prism => 0,
            Kind::Antiprism => 1,
        }
    }

    pub fn vertex_count(&self) -> u32 {
        2 * self.n
    }

    /// All vertices in canonical order (top layer first, then bottom).
    pub fn vertices(&self) -> impl Iterator<Item = PointId> {
        let n = self.n;
        (0..n)
            .map(PointId::top)
            .chain((0..n).map(PointId::bottom))
    }

    /// Angle position of a vertex in units of pi/n, in [0, 2n).
    pub fn angle_units(&self, p: PointId) -> u32 {
        match p.layer {
            Layer::Top => 2 * p.index,
            Layer::Bottom => 2 * p.index + self.offset(),
        }
    }

    fn layer_offset(&self, layer: Layer) -> u32 {
        match layer {
            Layer::Top => 0,
            Layer::Bottom => self.offset(),
        }
    }

    fn check_index(&self, v: u32) -> Result<()> {
        if v >= self.n {
            return Err(Error::Domain(format!(
                "vertex index {v} out of range for n = {}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Layer of the solid a vertex belongs to. `Top < Bottom` is the canonical
/// point order used throughout (tets, facets, documents).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Layer {
    Top,
    Bottom,
}

impl Layer {
    pub fn opposite(self) -> Layer {
        match self {
            Layer::Top => Layer::Bottom,
            Layer::Bottom => Layer::Top,
        }
    }
}

/// A vertex of the solid: layer plus polygon index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PointId {
    pub layer: Layer,
    pub index: u32,
}

impl PointId {
    /// Canonical constructor; reduces the index modulo n.
    pub fn new(layer: Layer, index: u32, n: u32) -> PointId {
        PointId {
            layer,
            index: index % n,
        }
    }

    pub fn top(index: u32) -> PointId {
        PointId {
            layer: Layer::Top,
            index,
        }
    }

    pub fn bottom(index: u32) -> PointId {
        PointId {
            layer: Layer::Bottom,
            index,
        }
    }

    /// Compact code in [0, 2n) with the top layer first.
    pub fn code(&self, n: u32) -> u32 {
        match self.layer {
            Layer::Top => self.index,
            Layer::Bottom => n + self.index,
        }
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.layer {
            Layer::Top => write!(f, "T{}", self.index),
            Layer::Bottom => write!(f, "B{}", self.index),
        }
    }
}

/// A chord of one polygon layer, stored with `a < b`.
///
/// A chord with `|a - b| = 1 (mod n)` is a boundary edge of its polygon,
/// otherwise it is an interior diagonal.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Chord {
    pub layer: Layer,
    pub a: u32,
    pub b: u32,
}

impl Chord {
    pub fn new(layer: Layer, a: u32, b: u32, n: u32) -> Result<Chord> {
        let a = a % n;
        let b = b % n;
        if a == b {
            return Err(Error::Domain(format!(
                "chord endpoints must differ, got {a} and {b}"
            )));
        }
        Ok(Chord {
            layer,
            a: a.min(b),
            b: a.max(b),
        })
    }

    pub fn is_boundary(&self, n: u32) -> bool {
        self.b - self.a == 1 || (self.a == 0 && self.b == n - 1)
    }
}

/// One of the two open arcs a chord cuts the polygon circle into.
///
/// `ArcAb` is the set of vertices strictly between `a` and `b` going
/// counterclockwise (i.e. indices in (a, b)); `ArcBa` is the complement.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Side {
    ArcAb,
    ArcBa,
}

impl Side {
    /// The side of `chord` containing vertex index `v` of the same polygon.
    pub fn containing(chord: &Chord, v: u32, n: u32) -> Result<Side> {
        if v >= n {
            return Err(Error::Domain(format!("vertex {v} out of range")));
        }
        if v == chord.a || v == chord.b {
            return Err(Error::Domain(format!(
                "vertex {v} lies on chord ({}, {})",
                chord.a, chord.b
            )));
        }
        if chord.a < v && v < chord.b {
            Ok(Side::ArcAb)
        } else {
            Ok(Side::ArcBa)
        }
    }

    /// For a polygon boundary edge, the side facing the polygon interior.
    pub fn interior_of_boundary_edge(chord: &Chord, n: u32) -> Result<Side> {
        if !chord.is_boundary(n) {
            return Err(Error::Domain(format!(
                "chord ({}, {}) is not a boundary edge",
                chord.a, chord.b
            )));
        }
        // The interior is the side holding the other n - 2 vertices.
        if chord.b - chord.a == 1 {
            Ok(Side::ArcBa)
        } else {
            Ok(Side::ArcAb)
        }
    }

    /// Membership test for an arbitrary vertex index.
    pub fn contains(&self, chord: &Chord, v: u32) -> bool {
        if v == chord.a || v == chord.b {
            return false;
        }
        let inside = chord.a < v && v < chord.b;
        match self {
            Side::ArcAb => inside,
            Side::ArcBa => !inside,
        }
    }
}

/// The exact level structure of a chord's linear functional over the
/// opposite layer's vertices.
///
/// `levels[v]` is a signed class rank: equal ranks are exactly the equal
/// functional values, the chord's own line sits at rank 0, and ranks grow
/// toward the designated positive side. The equal-value classes are exactly
/// the pairs with `v + w + offset = a + b (mod n)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FunctionalLevels {
    pub chord: Chord,
    pub positive_side: Side,
    pub levels: Vec<i32>,
}

/// Raw comparable value of the chord functional at an opposite-layer vertex.
///
/// The value is a signed even integer that orders vertices exactly like the
/// functional does: `raw(v) < raw(w)` iff `f(v) < f(w)`, with 0 on the
/// chord's line. It is *not* the class rank (see [`FunctionalLevels`]).
fn raw_level(shape: &ShapeSpec, chord: &Chord, side: Side, v: u32) -> i64 {
    let n = shape.n() as i64;
    let p = (2 * chord.a + shape.layer_offset(chord.layer)) as i64;
    let q = (2 * chord.b + shape.layer_offset(chord.layer)) as i64;
    let w = (2 * v + shape.layer_offset(chord.layer.opposite())) as i64;
    let fold = |d: i64| {
        let d = d.rem_euclid(4 * n);
        d.min(4 * n - d)
    };
    // Angular distance from the chord's short-arc midpoint direction, in
    // units of pi/(2n); the functional is a strictly decreasing function of
    // it on [0, 2n]. The chord's own endpoints sit at distance k0.
    let k = fold(2 * w - p - q);
    let k0 = fold(p - q);
    // The short-arc midpoint direction always lies on the ArcAb side.
    let sign = match side {
        Side::ArcAb => 1,
        Side::ArcBa => -1,
    };
    sign * (k0 - k)
}

fn check_chord(shape: &ShapeSpec, chord: &Chord) -> Result<()> {
    let n = shape.n();
    if chord.a >= n || chord.b >= n || chord.a == chord.b {
        return Err(Error::Domain(format!(
            "chord ({}, {}) invalid for n = {n}",
            chord.a, chord.b
        )));
    }
    Ok(())
}

/// Exact signed levels of a chord's functional over the opposite layer.
pub fn functional_levels(shape: &ShapeSpec, chord: &Chord, side: Side) -> Result<FunctionalLevels> {
    check_chord(shape, chord)?;
    let n = shape.n();
    let raw: Vec<i64> = (0..n).map(|v| raw_level(shape, chord, side, v)).collect();
    // Compress to consecutive class ranks, anchoring the chord's zero class
    // at rank 0 whether or not an opposite-layer vertex realizes it.
    let mut classes: Vec<i64> = raw.iter().copied().chain([0]).collect();
    classes.sort_unstable();
    classes.dedup();
    let zero_rank = classes.binary_search(&0).unwrap() as i32;
    let levels = raw
        .iter()
        .map(|r| classes.binary_search(r).unwrap() as i32 - zero_rank)
        .collect();
    Ok(FunctionalLevels {
        chord: *chord,
        positive_side: side,
        levels,
    })
}

/// Height of opposite-layer vertex `v` with respect to a chord: the number
/// of distinct functional values over the opposite layer strictly below the
/// value at `v`.
pub fn height(shape: &ShapeSpec, chord: &Chord, side: Side, v: u32) -> Result<u32> {
    check_chord(shape, chord)?;
    shape.check_index(v)?;
    let n = shape.n();
    let rv = raw_level(shape, chord, side, v);
    let mut below: Vec<i64> = (0..n)
        .map(|w| raw_level(shape, chord, side, w))
        .filter(|r| *r < rv)
        .collect();
    below.sort_unstable();
    below.dedup();
    Ok(below.len() as u32)
}

/// Height table of a chord over all opposite-layer vertices.
pub fn height_table(shape: &ShapeSpec, chord: &Chord, side: Side) -> Result<Vec<u32>> {
    check_chord(shape, chord)?;
    let n = shape.n();
    let raw: Vec<i64> = (0..n).map(|v| raw_level(shape, chord, side, v)).collect();
    let mut classes = raw.clone();
    classes.sort_unstable();
    classes.dedup();
    Ok(raw
        .iter()
        .map(|r| classes.binary_search(r).unwrap() as u32)
        .collect())
}

/// O(1) height of a bottom vertex with respect to the top boundary edge
/// `(a, a+1 mod n)`, positive side toward the polygon interior.
///
/// Validated against the general level computation for all n <= 16 before
/// being used anywhere else.
pub fn boundary_height_closed_form(shape: &ShapeSpec, edge_start: u32, v: u32) -> u32 {
    let n = shape.n();
    let a = edge_start % n;
    match shape.kind() {
        Kind::Prism => {
            let fwd = (v + 2 * n - a - 1) % n;
            let back = (a + n - v % n) % n;
            fwd.min(back)
        }
        Kind::Antiprism => {
            let fwd = (v + n - a) % n;
            let back = (a + n - v % n) % n;
            fwd.min(back)
        }
    }
}

/// Heights of a bottom vertex with respect to all n top boundary edges,
/// listed cyclically (edge j runs from vertex j to j + 1).
pub fn boundary_height_profile(shape: &ShapeSpec, base: u32) -> Result<Vec<u32>> {
    shape.check_index(base)?;
    let n = shape.n();
    Ok((0..n)
        .map(|j| boundary_height_closed_form(shape, j, base))
        .collect())
}

/// Whether a top chord `{i, j}` and a bottom chord `{k, l}` are parallel,
/// i.e. `k + l + offset = i + j (mod n)`. Parallel top/bottom chord pairs
/// are exactly the coplanar ones.
pub fn parallel_chords(shape: &ShapeSpec, top: &Chord, bottom: &Chord) -> bool {
    debug_assert_eq!(top.layer, Layer::Top);
    debug_assert_eq!(bottom.layer, Layer::Bottom);
    let n = shape.n();
    (bottom.a + bottom.b + shape.offset()) % n == (top.a + top.b) % n
}
