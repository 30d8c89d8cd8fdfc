//! Exact combinatorial toolkit for triangulations of the prism and
//! antiprism over a regular n-gon.
//!
//! The toolkit models the two stacked regular polygons purely in integer
//! arithmetic (no floating point on any trusted path), enumerates all
//! triangulations of the solids at desk scale, constructs maximum-size
//! witnesses, and mechanically checks the quantitative machinery behind the
//! closed-form maximal sizes
//! `ceil((n^2 + 6n - 16) / 4)` (prism) and `floor((n^2 + 8n - 16) / 4)`
//! (antiprism): height functions on chords, link cardinality bounds, a
//! telescoping re-expression of the total link size, and a per-step
//! monotonicity lemma.

pub mod bounds;
pub mod construct;
pub mod enumerate;
pub mod error;
pub mod kernel;
pub mod polygon;
pub mod shape;

pub use bounds::{
    alpha_eq1, alpha_eq2, check_monotone_lemma, extract_structure, formula_alpha, formula_max,
    g_sum, link_bounds_check, ApexAssignment, BoundReport, ExtractedStructure, LinkMap,
};
pub use construct::{construct_maximal, placing_triangulation, PlacingOrder, Region};
pub use enumerate::{
    enumerate_all, enumerate_visit, max_triangulation, EnumerateOptions, EnumerationResult,
};
pub use error::{Error, Result};
pub use kernel::{
    boundary_face_of, candidate_tets, classify_tet, orient, proper_pair, validate_triangulation,
    BoundaryFace, FailureCode, Tet, Triangulation3D, Validator, ValidityReport,
};
pub use polygon::{
    admissible_order, all_admissible_orders, enumerate_polygon_triangulations, region_edge_sets,
    AdmissibleOrder, PolyEdge, PolygonTriangulation, RegionEdgeSets, SidedEdge, Triangle,
};
pub use shape::{
    boundary_height_profile, functional_levels, height, height_table, parallel_chords, Chord,
    FunctionalLevels, Kind, Layer, PointId, ShapeSpec, Side,
};
