//! Command-line driver: enumeration, maximum witnesses, witness
//! verification, bound sweeps and height tables, with JSON reports.
//!
//! Exit codes: 0 pass, 1 usage or file-format error, 2 capacity guard,
//! 3 lemma or internal-invariant failure, 4 validity failure.
//! The PRISMTRI_THREADS environment variable bounds the worker count;
//! results are identical for any value >= 1.

mod docs;

use std::collections::BTreeMap;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use docs::{Inputs, ReportDocument, TriangulationDocument, SCHEMA_VERSION};
use prismtri::bounds::{
    formula_alpha, formula_max, sweep_identity_exhaustive, sweep_identity_random, sweep_monotone,
    ApexAssignment, IdentitySweep,
};
use prismtri::construct::construct_maximal_seeded;
use prismtri::enumerate::{enumerate_all_with, max_triangulation_with, EnumerateOptions};
use prismtri::error::Error;
use prismtri::kernel::{classify_tet, validate_triangulation};
use prismtri::polygon::PolyEdge;
use prismtri::shape::{
    boundary_height_profile, functional_levels, Chord, Kind, Layer, ShapeSpec, Side,
};
use prismtri::{admissible_order, alpha_eq1, link_bounds_check, PolygonTriangulation};

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_CAPACITY: i32 = 2;
const EXIT_INVARIANT: i32 = 3;
const EXIT_VALIDITY: i32 = 4;

#[derive(Parser)]
#[command(
    name = "prismtri",
    version,
    about = "Exact triangulation toolkit for regular prisms and antiprisms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Prism,
    Antiprism,
}

impl ShapeArg {
    fn spec(self, n: u32) -> Result<ShapeSpec, Error> {
        match self {
            ShapeArg::Prism => ShapeSpec::new(Kind::Prism, n),
            ShapeArg::Antiprism => ShapeSpec::new(Kind::Antiprism, n),
        }
    }

    fn name(self) -> &'static str {
        match self {
            ShapeArg::Prism => "prism",
            ShapeArg::Antiprism => "antiprism",
        }
    }
}

#[derive(Args)]
struct ShapeOpts {
    /// Solid to operate on.
    #[arg(long, value_enum)]
    shape: ShapeArg,
    /// Number of polygon vertices per layer.
    #[arg(long)]
    n: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustively enumerate all triangulations of the solid.
    Enumerate {
        #[command(flatten)]
        shape: ShapeOpts,
        /// Write the JSON report to a file instead of stdout.
        #[arg(long)]
        out: Option<String>,
        /// Include the size histogram in the report.
        #[arg(long)]
        histogram: bool,
        /// Worker count (bounded by PRISMTRI_THREADS).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Produce a maximum-size triangulation witness document.
    Max {
        #[command(flatten)]
        shape: ShapeOpts,
        /// Stop as soon as a triangulation of closed-form size is found,
        /// falling back to the direct constructor beyond the search guard.
        #[arg(long)]
        assume_bound: bool,
        /// Seed for randomized constructor restarts.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the witness document to a file instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Verify a triangulation witness document.
    Verify {
        /// Witness document path.
        file: String,
    },
    /// Run the bound identity and monotonicity sweeps.
    Bound {
        #[command(flatten)]
        shape: ShapeOpts,
        /// Exhaust all triangulations, rooted orders and assignments
        /// (n <= 6); past that, all identity instances are seeded samples.
        #[arg(long)]
        exhaustive_identity: bool,
        /// Seed for the sampled identity instances.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report to a file instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Print level and height tables for one top boundary edge.
    Heights {
        #[command(flatten)]
        shape: ShapeOpts,
        /// Edge index a; the edge runs from vertex a to a+1 (mod n).
        #[arg(long)]
        edge: u32,
    },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match cli.command {
        Command::Enumerate {
            shape,
            out,
            histogram,
            jobs,
        } => cmd_enumerate(shape, out, histogram, jobs),
        Command::Max {
            shape,
            assume_bound,
            seed,
            out,
        } => cmd_max(shape, assume_bound, seed, out),
        Command::Verify { file } => cmd_verify(&file),
        Command::Bound {
            shape,
            exhaustive_identity,
            seed,
            out,
        } => cmd_bound(shape, exhaustive_identity, seed, out),
        Command::Heights { shape, edge } => cmd_heights(shape, edge),
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Domain(_) => EXIT_USAGE,
        Error::Capacity(_) => EXIT_CAPACITY,
        Error::Structural(_) => EXIT_INVARIANT,
        Error::Construction { .. } => EXIT_INVARIANT,
    }
}

fn emit(out: &Option<String>, text: &str) -> i32 {
    match out {
        Some(path) => match std::fs::write(path, text) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: cannot write {path}: {e}");
                EXIT_USAGE
            }
        },
        None => {
            print!("{text}");
            EXIT_OK
        }
    }
}

fn report(
    command: &str,
    inputs: Inputs,
    results: impl Serialize,
    passed: bool,
    start: Instant,
) -> ReportDocument {
    ReportDocument {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        inputs,
        results: serde_json::to_value(results).expect("serializable"),
        passed,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

fn cmd_enumerate(
    shape_args: ShapeOpts,
    out: Option<String>,
    histogram: bool,
    jobs: Option<usize>,
) -> i32 {
    let start = Instant::now();
    let shape = match shape_args.shape.spec(shape_args.n) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let opts = EnumerateOptions {
        jobs,
        ..Default::default()
    };
    let res = match enumerate_all_with(shape, opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let mut results = json!({
        "count": res.count,
        "minSize": res.min_size,
        "maxSize": res.max_size,
        "formulaMax": formula_max(&shape),
        "maxAttainsFormula": res.max_size as u64 == formula_max(&shape),
    });
    if histogram {
        let hist: BTreeMap<String, u64> = res
            .size_histogram
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        results["histogram"] = serde_json::to_value(hist).unwrap();
    }
    let inputs = Inputs {
        shape: Some(shape_args.shape.name().into()),
        n: Some(shape_args.n),
        histogram: Some(histogram),
        jobs,
        ..Default::default()
    };
    eprintln!(
        "enumerate {} n={}: count {}, sizes {}..{} ({} ms)",
        shape_args.shape.name(),
        shape_args.n,
        res.count,
        res.min_size,
        res.max_size,
        start.elapsed().as_millis()
    );
    emit(
        &out,
        &report("enumerate", inputs, results, true, start).to_json(),
    )
}

fn cmd_max(shape_args: ShapeOpts, assume_bound: bool, seed: u64, out: Option<String>) -> i32 {
    let start = Instant::now();
    let shape = match shape_args.shape.spec(shape_args.n) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let within_search_guard = match shape.kind() {
        Kind::Prism => shape.n() <= 6,
        Kind::Antiprism => shape.n() <= 5,
    };
    let (tri, generator) = if !assume_bound {
        match max_triangulation_with(shape, false, EnumerateOptions::default()) {
            Ok((_, tri)) => (tri, "exhaustive enumeration".to_string()),
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code_for(&e);
            }
        }
    } else if within_search_guard {
        match max_triangulation_with(shape, true, EnumerateOptions::default()) {
            Ok((_, tri)) => (tri, "bounded search".to_string()),
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code_for(&e);
            }
        }
    } else {
        match construct_maximal_seeded(&shape, seed) {
            Ok(tri) => (tri, format!("constructor seed={seed}")),
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code_for(&e);
            }
        }
    };
    // Never emit an uncertified witness.
    if !validate_triangulation(&tri).ok() || tri.size() as u64 != formula_max(&shape) {
        eprintln!("error: produced witness failed certification");
        return EXIT_INVARIANT;
    }
    eprintln!(
        "max {} n={}: size {} ({} ms)",
        shape_args.shape.name(),
        shape_args.n,
        tri.size(),
        start.elapsed().as_millis()
    );
    let doc = TriangulationDocument::from_triangulation(&tri, &generator).canonicalized();
    emit(&out, &doc.to_json())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct VerifyCheck {
    name: String,
    ok: bool,
    failures: Vec<VerifyFailure>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct VerifyFailure {
    code: String,
    witness: String,
}

fn cmd_verify(file: &str) -> i32 {
    let start = Instant::now();
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {file}: {e}");
            return EXIT_USAGE;
        }
    };
    let doc = match TriangulationDocument::from_json(&text) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let tri = match doc.to_triangulation() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let n = tri.shape.n();

    let mut checks = Vec::new();
    let validity = validate_triangulation(&tri);
    checks.push(VerifyCheck {
        name: "validity".into(),
        ok: validity.ok(),
        failures: validity
            .failures
            .iter()
            .map(|(code, witness)| VerifyFailure {
                code: code.to_string(),
                witness: witness.clone(),
            })
            .collect(),
    });

    let mut fans_top = 0u32;
    let mut fans_bottom = 0u32;
    for t in &tri.tets {
        match classify_tet(t) {
            (3, 1) => fans_top += 1,
            (1, 3) => fans_bottom += 1,
            _ => {}
        }
    }
    let types_ok = fans_top == n - 2 && fans_bottom == n - 2;
    checks.push(VerifyCheck {
        name: "tet-type-counts".into(),
        ok: types_ok,
        failures: if types_ok {
            Vec::new()
        } else {
            vec![VerifyFailure {
                code: "face-not-tiled".into(),
                witness: format!(
                    "{fans_top} top-joined and {fans_bottom} bottom-joined tets, expected {}",
                    n - 2
                ),
            }]
        },
    });

    // Link bounds presuppose a structurally valid complex.
    let link_ok = validity.ok() && types_ok && matches!(link_bounds_check(&tri), Ok(true));
    checks.push(VerifyCheck {
        name: "link-bounds".into(),
        ok: link_ok,
        failures: if link_ok {
            Vec::new()
        } else {
            vec![VerifyFailure {
                code: "link-bounds".into(),
                witness: "link bound or path discipline violated (or skipped: invalid complex)"
                    .into(),
            }]
        },
    });

    let passed = checks.iter().all(|c| c.ok);
    let results = json!({
        "shape": { "kind": tri.shape.kind().to_string(), "n": n },
        "size": tri.size(),
        "checks": serde_json::to_value(&checks).unwrap(),
    });
    let inputs = Inputs {
        file: Some(file.to_string()),
        ..Default::default()
    };
    let rep = report("verify", inputs, results, passed, start);
    print!("{}", rep.to_json());
    eprintln!(
        "verify {file}: {}",
        if passed { "all checks passed" } else { "FAILED" }
    );
    if passed {
        EXIT_OK
    } else {
        EXIT_VALIDITY
    }
}

fn cmd_bound(
    shape_args: ShapeOpts,
    exhaustive_identity: bool,
    seed: u64,
    out: Option<String>,
) -> i32 {
    let start = Instant::now();
    let shape = match shape_args.shape.spec(shape_args.n) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let n = shape.n();
    if n > 12 {
        eprintln!("error: bound sweeps support n <= 12");
        return EXIT_CAPACITY;
    }
    let identity: Result<(IdentitySweep, bool), Error> = if n <= 6 {
        sweep_identity_exhaustive(&shape, exhaustive_identity).map(|s| (s, true))
    } else {
        let count = if exhaustive_identity { 20_000 } else { 10_000 };
        sweep_identity_random(&shape, count, seed).map(|mut s| {
            // Anchor the consistent maximum: a fan with a constant
            // assignment attains the profile sum exactly.
            if let Ok(a) = fan_constant_alpha(&shape) {
                s.max_alpha_consistent = s.max_alpha_consistent.max(a);
            }
            (s, false)
        })
    };
    let (identity, exhausted) = match identity {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let (chords, monotone_failures) = match sweep_monotone(&shape) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let passed = identity.failures == 0
        && monotone_failures == 0
        && identity.max_alpha_consistent == formula_alpha(&shape) as i64;
    let results = json!({
        "identity": {
            "instances": identity.instances,
            "failures": identity.failures,
            "exhaustive": exhausted,
            "maxAlphaConsistent": identity.max_alpha_consistent,
        },
        "monotone": { "chordSides": chords, "failures": monotone_failures },
        "formulaAlpha": formula_alpha(&shape),
        "formulaMax": formula_max(&shape),
    });
    let inputs = Inputs {
        shape: Some(shape_args.shape.name().into()),
        n: Some(shape_args.n),
        exhaustive_identity: Some(exhaustive_identity),
        seed: Some(seed),
        ..Default::default()
    };
    eprintln!(
        "bound {} n={}: identity {}/{} ok, monotone {}/{} ok, max alpha {}",
        shape_args.shape.name(),
        n,
        identity.instances - identity.failures,
        identity.instances,
        chords - monotone_failures,
        chords,
        identity.max_alpha_consistent
    );
    let code = emit(
        &out,
        &report("bound", inputs, results, passed, start).to_json(),
    );
    if code != EXIT_OK {
        return code;
    }
    if passed {
        EXIT_OK
    } else {
        EXIT_INVARIANT
    }
}

/// Alpha of the fan triangulation with every apex at bottom vertex 0: the
/// boundary profile sum, which is the closed-form alpha.
fn fan_constant_alpha(shape: &ShapeSpec) -> Result<i64, Error> {
    let n = shape.n();
    let mut diagonals = std::collections::BTreeSet::new();
    for k in 2..n - 1 {
        diagonals.insert(PolyEdge::new(0, k, n)?);
    }
    let pt = PolygonTriangulation::new(n, diagonals)?;
    let root = PolyEdge::new(0, 1, n)?;
    let ao = admissible_order(&pt, &root)?;
    let apex = ApexAssignment {
        x: vec![0; ao.order.len()],
    };
    alpha_eq1(shape, &pt, &ao, &apex)
}

fn cmd_heights(shape_args: ShapeOpts, edge: u32) -> i32 {
    let shape = match shape_args.shape.spec(shape_args.n) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let n = shape.n();
    if edge >= n {
        eprintln!("error: edge index {edge} out of range for n = {n}");
        return EXIT_USAGE;
    }
    let chord = match Chord::new(Layer::Top, edge, (edge + 1) % n, n) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let side = match Side::interior_of_boundary_edge(&chord, n) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let fl = match functional_levels(&shape, &chord, side) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    println!(
        "{} n={} top edge ({}, {}), positive side: polygon interior",
        shape_args.shape.name(),
        n,
        edge,
        (edge + 1) % n
    );
    println!("bottom vertex, level, height:");
    for v in 0..n {
        let h = prismtri::height(&shape, &chord, side, v).unwrap();
        println!("  B{v}: level {:+}, height {h}", fl.levels[v as usize]);
    }
    let profile = boundary_height_profile(&shape, edge).unwrap();
    let sum: u32 = profile.iter().sum();
    println!(
        "boundary height profile of B{edge} across edges (0,1)..({},0): {:?} (sum {sum})",
        n - 1,
        profile
    );
    EXIT_OK
}
