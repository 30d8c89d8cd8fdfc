//! Exhaustive enumeration of all triangulations of the solid by
//! facet-driven backtracking.
//!
//! Every branch decision is forced by the lexicographically least pending
//! facet (a triangle that still needs a tet on a known side), so each
//! triangulation is reached along exactly one root-to-leaf path and the
//! enumeration is duplicate-free by construction; a hash check asserts it
//! anyway. Seeding: the prism branches on the two diagonals of the side
//! quad {T0, T1, B1, B0}, the antiprism on the single tet covering the
//! boundary facet {T0, T1, B0}.
//!
//! Every leaf is re-validated by the full validator (facet census, face
//! tiling, connectivity; pairwise properness via the tested compatibility
//! matrix) before it is counted.

use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::bounds::formula_max;
use crate::error::{Error, Result};
use crate::kernel::{classify_tet, FacetId, SearchTables, Tet, Triangulation3D, Validator};
use crate::shape::{Kind, PointId, ShapeSpec};

/// Options for an enumeration run.
#[derive(Clone, Copy, Default, Debug)]
pub struct EnumerateOptions {
    /// Lift the default size guards (prism n <= 6, antiprism n <= 5).
    pub override_guard: bool,
    /// Worker count; defaults to the available parallelism, bounded by the
    /// PRISMTRI_THREADS environment variable.
    pub jobs: Option<usize>,
}

/// Aggregated outcome of an exhaustive enumeration.
#[derive(Clone, Debug)]
pub struct EnumerationResult {
    pub shape: ShapeSpec,
    pub count: u64,
    pub size_histogram: BTreeMap<usize, u64>,
    pub min_size: usize,
    pub max_size: usize,
    /// Canonically smallest witness among the maximum-size triangulations;
    /// identical for every worker count.
    pub max_witness: Triangulation3D,
    pub elapsed: Duration,
}

fn check_guard(shape: &ShapeSpec, opts: &EnumerateOptions) -> Result<()> {
    let limit = match shape.kind() {
        Kind::Prism => 6,
        Kind::Antiprism => 5,
    };
    if shape.n() > limit && !opts.override_guard {
        return Err(Error::Capacity(format!(
            "enumeration guard: {} n <= {limit} (override to proceed)",
            shape.kind()
        )));
    }
    Ok(())
}

fn effective_jobs(opts: &EnumerateOptions) -> usize {
    let default = std::thread::available_parallelism()
        .map(|v| v.get())
        .unwrap_or(1);
    let requested = opts.jobs.unwrap_or(default).max(1);
    let env_cap = std::env::var("PRISMTRI_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|v| *v >= 1)
        .unwrap_or(usize::MAX);
    requested.min(env_cap)
}

/// A snapshot of a search node: the chosen candidate indices plus the
/// pending facet map. The compatibility mask is recomputed on resume.
#[derive(Clone, Debug)]
struct Node {
    chosen: Vec<u32>,
    pending: BTreeMap<FacetId, i8>,
}

/// Per-branch accumulation, merged deterministically by branch rank.
#[derive(Clone, Debug, Default)]
struct BranchOut {
    count: u64,
    hist: BTreeMap<usize, u64>,
    witness: Option<Vec<u32>>,
    hashes: Vec<u128>,
}

struct Dfs<'a> {
    tables: std::sync::Arc<SearchTables>,
    validator: Validator,
    expect_fans: usize,
    masks: Vec<Vec<u64>>,
    chosen: Vec<u32>,
    pending: BTreeMap<FacetId, i8>,
    journal: Vec<(FacetId, Option<i8>)>,
    stop_at: Option<usize>,
    stopped: bool,
    out: BranchOut,
    visitor: Option<&'a (dyn Fn(&Triangulation3D) + Sync)>,
}

impl<'a> Dfs<'a> {
    fn from_node(
        tables: &std::sync::Arc<SearchTables>,
        node: &Node,
        stop_at: Option<usize>,
        visitor: Option<&'a (dyn Fn(&Triangulation3D) + Sync)>,
    ) -> Dfs<'a> {
        let words = tables.words;
        let m = tables.cands.len();
        let mut base = vec![u64::MAX; words];
        if let Some(last) = base.last_mut() {
            let rem = m % 64;
            if rem != 0 {
                *last = (1u64 << rem) - 1;
            }
        }
        let mut masks = vec![base];
        for (d, c) in node.chosen.iter().enumerate() {
            let mut next = masks[d].clone();
            for (w, row) in next.iter_mut().zip(tables.compat[*c as usize].iter()) {
                *w &= row;
            }
            masks.push(next);
        }
        Dfs {
            tables: tables.clone(),
            validator: Validator::with_tables(tables.clone()),
            expect_fans: tables.shape.n() as usize - 2,
            masks,
            chosen: node.chosen.clone(),
            pending: node.pending.clone(),
            journal: Vec::new(),
            stop_at,
            stopped: false,
            out: BranchOut::default(),
            visitor,
        }
    }

    fn mask_bit(&self, depth: usize, cand: u32) -> bool {
        self.masks[depth][cand as usize / 64] >> (cand as usize % 64) & 1 == 1
    }

    fn apply(&mut self, cand: u32) {
        let depth = self.chosen.len();
        if self.masks.len() <= depth + 1 {
            self.masks.push(vec![0; self.tables.words]);
        }
        let (head, tail) = self.masks.split_at_mut(depth + 1);
        let src = &head[depth];
        let dst = &mut tail[0];
        for ((d, s), row) in dst
            .iter_mut()
            .zip(src.iter())
            .zip(self.tables.compat[cand as usize].iter())
        {
            *d = s & row;
        }
        self.chosen.push(cand);
        for f in &self.tables.facets[cand as usize] {
            match self.pending.get(&f.fid).copied() {
                Some(req) => {
                    debug_assert_eq!(req, f.side, "pending side must match the new tet");
                    self.pending.remove(&f.fid);
                    self.journal.push((f.fid, Some(req)));
                }
                None => {
                    if !f.boundary {
                        self.pending.insert(f.fid, -f.side);
                        self.journal.push((f.fid, None));
                    }
                }
            }
        }
    }

    fn undo(&mut self, mark: usize) {
        self.chosen.pop();
        while self.journal.len() > mark {
            let (fid, prev) = self.journal.pop().unwrap();
            match prev {
                Some(v) => {
                    self.pending.insert(fid, v);
                }
                None => {
                    self.pending.remove(&fid);
                }
            }
        }
    }

    fn run(&mut self) -> Result<()> {
        if self.stopped {
            return Ok(());
        }
        if self.pending.is_empty() {
            return self.leaf();
        }
        let (&fid, &need) = self.pending.first_key_value().unwrap();
        let Some(incident) = self.tables.incidence.get(&fid) else {
            return Ok(());
        };
        let depth = self.chosen.len();
        // Clone is cheap (small vec) and avoids borrowing tables across the
        // recursive call.
        let incident = incident.clone();
        for (cand, side) in incident {
            if side != need || !self.mask_bit(depth, cand) {
                continue;
            }
            let mark = self.journal.len();
            self.apply(cand);
            self.run()?;
            self.undo(mark);
            if self.stopped {
                return Ok(());
            }
        }
        Ok(())
    }

    fn leaf(&mut self) -> Result<()> {
        let tets: Vec<Tet> = self
            .chosen
            .iter()
            .map(|c| self.tables.cands[*c as usize])
            .collect();
        let tri = Triangulation3D::new(self.tables.shape, tets);
        let report = self.validator.validate(&tri.tets);
        if !report.ok() {
            return Err(Error::Structural(format!(
                "search leaf failed validation: {:?}",
                report.failures
            )));
        }
        let mut fans_top = 0usize;
        let mut fans_bottom = 0usize;
        for t in &tri.tets {
            match classify_tet(t) {
                (3, 1) => fans_top += 1,
                (1, 3) => fans_bottom += 1,
                _ => {}
            }
        }
        if fans_top != self.expect_fans || fans_bottom != self.expect_fans {
            return Err(Error::Structural(format!(
                "leaf has {fans_top} top-fan and {fans_bottom} bottom-fan tets, expected {}",
                self.expect_fans
            )));
        }
        if let Some(v) = self.visitor {
            v(&tri);
        }
        let mut canon = self.chosen.clone();
        canon.sort_unstable();
        self.out.count += 1;
        *self.out.hist.entry(canon.len()).or_insert(0) += 1;
        let best = self
            .out
            .witness
            .as_ref()
            .map(|w| {
                let wl = w.len();
                match canon.len().cmp(&wl) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Equal => canon < *w,
                    std::cmp::Ordering::Less => false,
                }
            })
            .unwrap_or(true);
        if best {
            self.out.witness = Some(canon.clone());
        }
        self.out.hashes.push(leaf_hash(&canon));
        if self.stop_at == Some(canon.len()) {
            self.stopped = true;
        }
        Ok(())
    }
}

fn leaf_hash(canon: &[u32]) -> u128 {
    let mut h1 = std::collections::hash_map::DefaultHasher::new();
    canon.hash(&mut h1);
    let mut h2 = std::collections::hash_map::DefaultHasher::new();
    0x9e3779b97f4a7c15u64.hash(&mut h2);
    canon.hash(&mut h2);
    ((h1.finish() as u128) << 64) | h2.finish() as u128
}

/// Required side of a boundary facet: the side holding the solid interior,
/// read off as the orientation of any vertex outside the facet's plane.
fn interior_side_of(tables: &SearchTables, tri: [PointId; 3]) -> i8 {
    let shape = tables.shape;
    shape
        .vertices()
        .map(|w| crate::kernel::orient4(&shape, &[tri[0], tri[1], tri[2], w]))
        .find(|s| *s != 0)
        .expect("solid is 3-dimensional")
}

fn seeds(tables: &SearchTables) -> Vec<Node> {
    let shape = tables.shape;
    let sorted3 = |mut t: [PointId; 3]| {
        t.sort_unstable();
        t
    };
    let pend = |tris: Vec<[PointId; 3]>| {
        let mut pending = BTreeMap::new();
        for tri in tris {
            let tri = sorted3(tri);
            let fid = crate::kernel::facet_id(&shape, &tri);
            pending.insert(fid, interior_side_of(tables, tri));
        }
        Node {
            chosen: Vec::new(),
            pending,
        }
    };
    let t = PointId::top;
    let b = PointId::bottom;
    match shape.kind() {
        Kind::Prism => vec![
            // Diagonal T0-B1 of side quad {T0, T1, B1, B0}.
            pend(vec![[t(0), t(1), b(1)], [t(0), b(0), b(1)]]),
            // Diagonal T1-B0.
            pend(vec![[t(0), t(1), b(0)], [t(1), b(0), b(1)]]),
        ],
        Kind::Antiprism => vec![pend(vec![[t(0), t(1), b(0)]])],
    }
}

/// Expands the seed nodes breadth-first until there are enough branches to
/// keep the workers busy; the node order stays canonical.
fn expand_branches(tables: &std::sync::Arc<SearchTables>, target: usize) -> Vec<Node> {
    let mut nodes = seeds(tables);
    loop {
        let expandable: Vec<usize> = (0..nodes.len())
            .filter(|i| !nodes[*i].pending.is_empty())
            .collect();
        if nodes.len() >= target || expandable.is_empty() {
            return nodes;
        }
        // Expand the largest pending node set first to even out work;
        // replacement in place keeps the global order canonical.
        let idx = expandable[0];
        let node = nodes.remove(idx);
        let (&fid, &need) = node.pending.first_key_value().unwrap();
        let mut children = Vec::new();
        if let Some(incident) = tables.incidence.get(&fid) {
            for &(cand, side) in incident {
                if side != need {
                    continue;
                }
                if !node
                    .chosen
                    .iter()
                    .all(|c| tables.compatible(*c, cand) && *c != cand)
                {
                    continue;
                }
                let mut dfs = Dfs::from_node(tables, &node, None, None);
                let mark = dfs.journal.len();
                dfs.apply(cand);
                children.push(Node {
                    chosen: dfs.chosen.clone(),
                    pending: dfs.pending.clone(),
                });
                dfs.undo(mark);
            }
        }
        for (k, child) in children.into_iter().enumerate() {
            nodes.insert(idx + k, child);
        }
    }
}

fn merge(
    shape: ShapeSpec,
    branches: Vec<BranchOut>,
    elapsed: Duration,
    tables: &SearchTables,
) -> Result<EnumerationResult> {
    let mut count = 0u64;
    let mut hist: BTreeMap<usize, u64> = BTreeMap::new();
    let mut witness: Option<Vec<u32>> = None;
    let mut hashes: Vec<u128> = Vec::new();
    for b in branches {
        count += b.count;
        for (k, v) in b.hist {
            *hist.entry(k).or_insert(0) += v;
        }
        if let Some(w) = b.witness {
            let better = witness
                .as_ref()
                .map(|cur| {
                    w.len() > cur.len() || (w.len() == cur.len() && w < *cur)
                })
                .unwrap_or(true);
            if better {
                witness = Some(w);
            }
        }
        hashes.extend(b.hashes);
    }
    if count == 0 {
        return Err(Error::Structural("enumeration found no triangulations".into()));
    }
    hashes.sort_unstable();
    let before = hashes.len();
    hashes.dedup();
    if hashes.len() != before {
        return Err(Error::Structural(
            "duplicate triangulation reached by two search paths".into(),
        ));
    }
    let witness = witness.unwrap();
    let tets: Vec<Tet> = witness
        .iter()
        .map(|c| tables.cands[*c as usize])
        .collect();
    let min_size = *hist.keys().next().unwrap();
    let max_size = *hist.keys().last().unwrap();
    Ok(EnumerationResult {
        shape,
        count,
        size_histogram: hist,
        min_size,
        max_size,
        max_witness: Triangulation3D::new(shape, tets),
        elapsed,
    })
}

/// Exhaustive enumeration with a per-leaf visitor. The visitor runs inside
/// worker threads; each triangulation is visited exactly once.
pub fn enumerate_visit<F>(
    shape: ShapeSpec,
    opts: EnumerateOptions,
    visitor: F,
) -> Result<EnumerationResult>
where
    F: Fn(&Triangulation3D) + Sync,
{
    check_guard(&shape, &opts)?;
    let start = Instant::now();
    let tables = SearchTables::new(shape)?;
    let jobs = effective_jobs(&opts);
    let branches = if jobs > 1 {
        expand_branches(&tables, jobs * 8)
    } else {
        seeds(&tables)
    };
    let results: Vec<BranchOut> = if jobs <= 1 || branches.len() <= 1 {
        let mut out = Vec::new();
        for node in &branches {
            let mut dfs = Dfs::from_node(&tables, node, None, Some(&visitor));
            dfs.run()?;
            out.push(dfs.out);
        }
        out
    } else {
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<Result<BranchOut>>>> =
            Mutex::new((0..branches.len()).map(|_| None).collect());
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(branches.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= branches.len() {
                        break;
                    }
                    let mut dfs = Dfs::from_node(&tables, &branches[i], None, Some(&visitor));
                    let r = dfs.run().map(|_| dfs.out);
                    slots.lock().unwrap()[i] = Some(r);
                });
            }
        });
        let collected = slots.into_inner().unwrap();
        let mut out = Vec::with_capacity(collected.len());
        for r in collected {
            out.push(r.expect("branch processed")?);
        }
        out
    };
    merge(shape, results, start.elapsed(), &tables)
}

/// Exhaustive enumeration with default options.
pub fn enumerate_all(shape: ShapeSpec) -> Result<EnumerationResult> {
    enumerate_all_with(shape, EnumerateOptions::default())
}

pub fn enumerate_all_with(
    shape: ShapeSpec,
    opts: EnumerateOptions,
) -> Result<EnumerationResult> {
    enumerate_visit(shape, opts, |_| {})
}

/// Maximum-size triangulation. Without `assume_bound`, maximality is
/// certified by exhaustion. With it, the sequential search stops at the
/// first triangulation of closed-form size (sound only because the size
/// theorems hold; the default mode never assumes them).
pub fn max_triangulation(
    shape: ShapeSpec,
    assume_bound: bool,
) -> Result<(usize, Triangulation3D)> {
    max_triangulation_with(shape, assume_bound, EnumerateOptions::default())
}

pub fn max_triangulation_with(
    shape: ShapeSpec,
    assume_bound: bool,
    opts: EnumerateOptions,
) -> Result<(usize, Triangulation3D)> {
    if !assume_bound {
        let res = enumerate_all_with(shape, opts)?;
        return Ok((res.max_size, res.max_witness));
    }
    check_guard(&shape, &opts)?;
    let tables = SearchTables::new(shape)?;
    let target = formula_max(&shape) as usize;
    for node in seeds(&tables) {
        let mut dfs = Dfs::from_node(&tables, &node, Some(target), None);
        dfs.run()?;
        if dfs.stopped {
            let witness = dfs.out.witness.expect("stop implies witness");
            let tets: Vec<Tet> = witness
                .iter()
                .map(|c| tables.cands[*c as usize])
                .collect();
            return Ok((target, Triangulation3D::new(shape, tets)));
        }
    }
    Err(Error::Structural(format!(
        "no triangulation of size {target} found"
    )))
}
