//! Problem model: task/system parameters, hybrid allocations, the weakly
//! symmetric reduce assignment and the two-subsystem file placement.
//!
//! Node ids are 1-based. Solvers are `1..=Ks`, helpers `Ks+1..=Ks+Kh`, and
//! any remaining ids up to `K` are idle. Files and reduce functions are also
//! 1-based. Subsystem 1 owns files `1..=αN`, subsystem 2 the rest.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{as_usize, binom_usize, divides, frac, int, subsets, Rational};

pub type NodeId = usize;

/// Intrinsic task parameters: `n` files, `q` reduce functions, each reduce
/// function computed by `s` nodes, `v` bits per intermediate value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskParams {
    pub n: usize,
    pub q: usize,
    pub s: usize,
    pub v: usize,
}

impl TaskParams {
    pub fn new(n: usize, q: usize, s: usize, v: usize) -> Result<Self> {
        let t = Self { n, q, s, v };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.q == 0 || self.v == 0 {
            return Err(Error::InvalidParams("N, Q and V must be positive".into()));
        }
        if self.s == 0 || self.s > self.q {
            return Err(Error::InvalidParams(format!("s must satisfy 1 <= s <= Q (s = {}, Q = {})", self.s, self.q)));
        }
        Ok(())
    }
}

/// Available resources and per-phase unit costs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemParams {
    pub k: usize,
    pub m: usize,
    pub c_m: Rational,
    pub c_s: Rational,
    pub c_r: Rational,
}

impl SystemParams {
    pub fn new(k: usize, m: usize, c_m: Rational, c_s: Rational, c_r: Rational) -> Result<Self> {
        let sys = Self { k, m, c_m, c_s, c_r };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.m == 0 {
            return Err(Error::InvalidParams("K and M must be positive".into()));
        }
        let zero = Rational::zero();
        if self.c_m <= zero || self.c_s <= zero || self.c_r < zero {
            return Err(Error::InvalidParams("c_m and c_s must be positive and c_r nonnegative".into()));
        }
        Ok(())
    }

    /// Storage budget in files per file, `M/N`.
    pub fn storage_ratio(&self, task: &TaskParams) -> Rational {
        frac(self.m, task.n)
    }

    /// Checks `M >= N`; below that no placement can cover every file.
    pub fn check_storage(&self, task: &TaskParams) -> Result<()> {
        if self.m < task.n {
            return Err(Error::Infeasible(format!(
                "storage budget M = {} is below the file count N = {}",
                self.m, task.n
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, lambda: &Rational) -> Self {
        Self { k: self.k, m: self.m, c_m: &self.c_m * lambda, c_s: &self.c_s * lambda, c_r: &self.c_r * lambda }
    }
}

/// Operating point of the hybrid scheme: a fraction `alpha` of the files is
/// handled by the solver-only subsystem with replication `r1`, the rest by the
/// helper-assisted subsystem with solver replication `r2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation {
    pub ks: usize,
    pub kh: usize,
    pub r1: usize,
    pub r2: usize,
    pub alpha: Rational,
}

impl Allocation {
    pub fn new(alpha: Rational, r1: usize, r2: usize, ks: usize, kh: usize) -> Self {
        Self { ks, kh, r1, r2, alpha }
    }

    pub fn alpha_bar(&self) -> Rational {
        Rational::one() - &self.alpha
    }

    /// Files stored per input file, `α r1 + ᾱ (r2 + 1)`; the `+1` is the
    /// helper copy of each subsystem-2 file.
    pub fn storage_per_file(&self) -> Rational {
        &self.alpha * int(self.r1) + self.alpha_bar() * int(self.r2 + 1)
    }

    /// Checks every structural constraint plus the storage budget.
    pub fn validate(&self, task: &TaskParams, system: &SystemParams) -> Result<()> {
        let bad = |msg: String| Err(Error::InfeasibleParams(msg));
        if self.alpha < Rational::zero() || self.alpha > Rational::one() {
            return bad(format!("alpha = {} outside [0, 1]", self.alpha));
        }
        if self.ks == 0 || self.ks > task.q {
            return bad(format!("need 1 <= Ks <= Q (Ks = {}, Q = {})", self.ks, task.q));
        }
        if self.ks + self.kh > system.k {
            return bad(format!("Ks + Kh = {} exceeds K = {}", self.ks + self.kh, system.k));
        }
        if task.s > self.ks {
            return bad(format!("s = {} exceeds Ks = {}", task.s, self.ks));
        }
        if self.r1 > self.ks || self.r2 > self.ks {
            return bad(format!("r1 = {} and r2 = {} must not exceed Ks = {}", self.r1, self.r2, self.ks));
        }
        if self.alpha < Rational::one() && self.kh == 0 {
            return bad("alpha < 1 requires at least one helper".into());
        }
        if self.alpha > Rational::zero() && self.r1 == 0 {
            return bad("alpha > 0 requires r1 >= 1".into());
        }
        if self.storage_per_file() > system.storage_ratio(task) {
            return bad(format!(
                "storage alpha*r1 + (1-alpha)*(r2+1) = {} exceeds M/N = {}",
                self.storage_per_file(),
                system.storage_ratio(task)
            ));
        }
        Ok(())
    }

    pub fn solvers(&self) -> Vec<NodeId> {
        (1..=self.ks).collect()
    }

    pub fn helpers(&self) -> Vec<NodeId> {
        (self.ks + 1..=self.ks + self.kh).collect()
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "alpha={} r1={} r2={} Ks={} Kh={}",
            crate::math::fmt_exact(&self.alpha),
            self.r1,
            self.r2,
            self.ks,
            self.kh
        )
    }
}

/// One integrality constraint the simulator needs and the allocation breaks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    FileSplit { alpha: Rational, n: usize },
    Subsystem1Batches { batches: usize, files: usize },
    Subsystem2Batches { batches: usize, files: usize },
    ReduceBatches { batches: usize, q: usize, nearest_q: usize },
    SubSegments { r1: usize, v: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FileSplit { alpha, n } => {
                write!(f, "alpha*N = {}*{} is not an integer", alpha, n)
            }
            Violation::Subsystem1Batches { batches, files } => {
                write!(f, "C(Ks,r1) = {batches} does not divide alpha*N = {files}")
            }
            Violation::Subsystem2Batches { batches, files } => {
                write!(f, "Kh*C(Ks,r2) = {batches} does not divide (1-alpha)*N = {files}")
            }
            Violation::ReduceBatches { batches, q, nearest_q } => {
                write!(f, "C(Ks,s) = {batches} does not divide Q = {q} (nearest feasible Q = {nearest_q})")
            }
            Violation::SubSegments { r1, v } => {
                write!(f, "r1 = {r1} does not divide V = {v}")
            }
        }
    }
}

/// Nearest positive multiple of `d` to `q`; ties go to the smaller one.
pub fn nearest_multiple(q: usize, d: usize) -> usize {
    let lower = q / d * d;
    let upper = lower + d;
    if lower == 0 || upper - q < q - lower {
        upper
    } else {
        lower
    }
}

/// Lists every integrality constraint the scheme construction needs.
pub fn divisibility_report(alloc: &Allocation, task: &TaskParams) -> Vec<Violation> {
    let mut out = Vec::new();
    let n1 = &alloc.alpha * int(task.n);
    let files1 = as_usize(&n1);
    if files1.is_none() {
        out.push(Violation::FileSplit { alpha: alloc.alpha.clone(), n: task.n });
    }
    let alpha_pos = alloc.alpha > Rational::zero();
    let alpha_lt1 = alloc.alpha < Rational::one();
    if let Some(f1) = files1 {
        if alpha_pos {
            let b = binom_usize(alloc.ks, alloc.r1);
            if !divides(b, f1) {
                out.push(Violation::Subsystem1Batches { batches: b, files: f1 });
            }
        }
        if alpha_lt1 {
            let f2 = task.n - f1;
            let b = alloc.kh * binom_usize(alloc.ks, alloc.r2);
            if !divides(b, f2) {
                out.push(Violation::Subsystem2Batches { batches: b, files: f2 });
            }
        }
    }
    let rb = binom_usize(alloc.ks, task.s);
    if !divides(rb, task.q) {
        out.push(Violation::ReduceBatches {
            batches: rb,
            q: task.q,
            nearest_q: if rb == 0 { 0 } else { nearest_multiple(task.q, rb) },
        });
    }
    if alpha_pos && !divides(alloc.r1, task.v) {
        out.push(Violation::SubSegments { r1: alloc.r1, v: task.v });
    }
    out
}

/// A batch of reduce functions owned by one size-`s` solver subset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReduceBatch {
    pub nodes: Vec<NodeId>,
    pub functions: Vec<usize>,
}

/// Reduce functions per node (`W_k`). Nodes absent from the map compute
/// nothing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReduceAssignment {
    pub q: usize,
    pub s: usize,
    pub solvers: Vec<NodeId>,
    pub batches: Vec<ReduceBatch>,
    functions: BTreeMap<NodeId, BTreeSet<usize>>,
}

static NO_ITEMS: BTreeSet<usize> = BTreeSet::new();

impl ReduceAssignment {
    /// `W_k`; empty for helpers and idle nodes.
    pub fn functions_of(&self, node: NodeId) -> &BTreeSet<usize> {
        self.functions.get(&node).unwrap_or(&NO_ITEMS)
    }

    /// Nodes computing reduce function `q`, ascending.
    pub fn owners_of(&self, q: usize) -> Vec<NodeId> {
        self.functions.iter().filter(|(_, w)| w.contains(&q)).map(|(k, _)| *k).collect()
    }

    pub fn max_load(&self) -> usize {
        self.functions.values().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// Builds an assignment from explicit per-node sets (`sets[k-1] = W_k`).
    /// Every function must be computed by the same number of nodes.
    pub fn from_node_sets(q: usize, sets: Vec<BTreeSet<usize>>) -> Result<Self> {
        let mut counts = vec![0usize; q];
        for w in &sets {
            for &f in w {
                if f == 0 || f > q {
                    return Err(Error::InvalidParams(format!("function {f} outside 1..={q}")));
                }
                counts[f - 1] += 1;
            }
        }
        let s = counts.first().copied().unwrap_or(0);
        if s == 0 || counts.iter().any(|&c| c != s) {
            return Err(Error::InvalidParams(
                "every reduce function must be computed by the same positive number of nodes".into(),
            ));
        }
        let functions: BTreeMap<_, _> =
            sets.into_iter().enumerate().filter(|(_, w)| !w.is_empty()).map(|(i, w)| (i + 1, w)).collect();
        let solvers = functions.keys().copied().collect();
        Ok(Self { q, s, solvers, batches: Vec::new(), functions })
    }

    /// Verifies the weakly symmetric structure: each function's owner set is
    /// an `s`-subset of the solvers and every such subset owns exactly
    /// `Q / C(Ks, s)` functions.
    pub fn check_weakly_symmetric(&self) -> Result<()> {
        let ks = self.solvers.len();
        let subsets_count = binom_usize(ks, self.s);
        if !divides(subsets_count, self.q) {
            return Err(Error::AssignmentNotSymmetric(format!(
                "C({ks},{}) = {subsets_count} does not divide Q = {}",
                self.s, self.q
            )));
        }
        let per = self.q / subsets_count;
        let mut by_owner: BTreeMap<Vec<NodeId>, usize> = BTreeMap::new();
        for f in 1..=self.q {
            *by_owner.entry(self.owners_of(f)).or_default() += 1;
        }
        for p in subsets(&self.solvers, self.s) {
            let got = by_owner.get(&p).copied().unwrap_or(0);
            if got != per {
                return Err(Error::AssignmentNotSymmetric(format!(
                    "solver subset {p:?} owns {got} functions, expected {per}"
                )));
            }
        }
        Ok(())
    }
}

/// Definition-style assignment: size-`s` solver subsets in lexicographic
/// order, each taking the next contiguous block of `Q / C(Ks, s)` functions.
pub fn build_reduce_assignment(solvers: &[NodeId], s: usize, q: usize) -> Result<ReduceAssignment> {
    let mut solvers = solvers.to_vec();
    solvers.sort_unstable();
    solvers.dedup();
    if s == 0 || s > solvers.len() {
        return Err(Error::InvalidParams(format!("s = {s} must satisfy 1 <= s <= |solvers| = {}", solvers.len())));
    }
    let count = binom_usize(solvers.len(), s);
    if !divides(count, q) {
        return Err(Error::Divisibility(vec![Violation::ReduceBatches {
            batches: count,
            q,
            nearest_q: nearest_multiple(q, count),
        }]));
    }
    let per = q / count;
    let mut functions: BTreeMap<NodeId, BTreeSet<usize>> = solvers.iter().map(|&k| (k, BTreeSet::new())).collect();
    let mut batches = Vec::with_capacity(count);
    for (i, p) in subsets(&solvers, s).into_iter().enumerate() {
        let block: Vec<usize> = (i * per + 1..=(i + 1) * per).collect();
        for k in &p {
            functions.get_mut(k).unwrap().extend(block.iter().copied());
        }
        batches.push(ReduceBatch { nodes: p, functions: block });
    }
    Ok(ReduceAssignment { q, s, solvers, batches, functions })
}

/// Files stored together by one solver subset (and, in subsystem 2, one
/// helper).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileBatch {
    pub solvers: Vec<NodeId>,
    pub helper: Option<NodeId>,
    pub files: Vec<usize>,
}

/// Per-node file sets `M_k` for `k = 1..=K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    pub n: usize,
    /// Files `1..=n1` belong to subsystem 1.
    pub n1: usize,
    pub subsystem1: Vec<FileBatch>,
    pub subsystem2: Vec<FileBatch>,
    files: Vec<BTreeSet<usize>>,
    holders: Vec<BTreeSet<NodeId>>,
}

impl Placement {
    /// Builds a placement from explicit per-node sets (`sets[k-1] = M_k`).
    /// Batch structure is left empty; `n1` is zero.
    pub fn from_node_sets(n: usize, sets: Vec<BTreeSet<usize>>) -> Result<Self> {
        for m in &sets {
            if let Some(&f) = m.iter().find(|&&f| f == 0 || f > n) {
                return Err(Error::InvalidParams(format!("file {f} outside 1..={n}")));
            }
        }
        let p = Self::assemble(n, 0, Vec::new(), Vec::new(), sets);
        if let Some(missing) = (1..=n).find(|&f| p.holders[f - 1].is_empty()) {
            return Err(Error::InvalidParams(format!("file {missing} is stored by no node")));
        }
        Ok(p)
    }

    fn assemble(
        n: usize,
        n1: usize,
        subsystem1: Vec<FileBatch>,
        subsystem2: Vec<FileBatch>,
        files: Vec<BTreeSet<usize>>,
    ) -> Self {
        let mut holders = vec![BTreeSet::new(); n];
        for (i, m) in files.iter().enumerate() {
            for &f in m {
                holders[f - 1].insert(i + 1);
            }
        }
        Self { n, n1, subsystem1, subsystem2, files, holders }
    }

    pub fn node_count(&self) -> usize {
        self.files.len()
    }

    /// `M_k`.
    pub fn files_of(&self, node: NodeId) -> &BTreeSet<usize> {
        node.checked_sub(1).and_then(|i| self.files.get(i)).unwrap_or(&NO_ITEMS)
    }

    /// Nodes storing file `n`.
    pub fn holders_of(&self, file: usize) -> &BTreeSet<NodeId> {
        &self.holders[file - 1]
    }

    pub fn total_stored(&self) -> usize {
        self.files.iter().map(BTreeSet::len).sum()
    }

    /// Copies held by the given nodes only (the solver-side storage count).
    pub fn stored_by(&self, nodes: &[NodeId]) -> usize {
        nodes.iter().map(|&k| self.files_of(k).len()).sum()
    }

    pub fn max_files_per_node(&self) -> usize {
        self.files.iter().map(BTreeSet::len).max().unwrap_or(0)
    }
}

/// Places files for the hybrid scheme on `k` nodes.
///
/// Subsystem 1 splits files `1..=αN` into `C(Ks, r1)` batches, one per
/// `r1`-subset of solvers. Subsystem 2 splits the remaining files into
/// `Kh·C(Ks, r2)` batches, helper-major, each stored by its solver subset
/// and its helper.
pub fn build_hybrid_placement(alloc: &Allocation, task: &TaskParams, k: usize) -> Result<Placement> {
    if alloc.ks == 0 || alloc.ks + alloc.kh > k {
        return Err(Error::InfeasibleParams(format!("Ks = {} and Kh = {} do not fit in K = {k}", alloc.ks, alloc.kh)));
    }
    if alloc.r1 > alloc.ks || alloc.r2 > alloc.ks {
        return Err(Error::InfeasibleParams("r1 and r2 must not exceed Ks".into()));
    }
    if alloc.alpha < Rational::one() && alloc.kh == 0 {
        return Err(Error::InfeasibleParams("alpha < 1 requires at least one helper".into()));
    }
    if alloc.alpha > Rational::zero() && alloc.r1 == 0 {
        return Err(Error::InfeasibleParams("alpha > 0 requires r1 >= 1".into()));
    }
    let violations = divisibility_report(alloc, task);
    if !violations.is_empty() {
        return Err(Error::Divisibility(violations));
    }
    let n1 = as_usize(&(&alloc.alpha * int(task.n))).expect("checked by divisibility report");
    let n2 = task.n - n1;
    let solvers = alloc.solvers();
    let mut files = vec![BTreeSet::new(); k];
    let mut next_file = 1;

    let mut subsystem1 = Vec::new();
    if n1 > 0 {
        let groups = subsets(&solvers, alloc.r1);
        let eta0 = n1 / groups.len();
        for t in groups {
            let batch: Vec<usize> = (next_file..next_file + eta0).collect();
            next_file += eta0;
            for &node in &t {
                files[node - 1].extend(batch.iter().copied());
            }
            subsystem1.push(FileBatch { solvers: t, helper: None, files: batch });
        }
    }

    let mut subsystem2 = Vec::new();
    if n2 > 0 {
        let groups = subsets(&solvers, alloc.r2);
        let eta1 = n2 / (alloc.kh * groups.len());
        for h in alloc.helpers() {
            for t in &groups {
                let batch: Vec<usize> = (next_file..next_file + eta1).collect();
                next_file += eta1;
                for &node in t.iter().chain(std::iter::once(&h)) {
                    files[node - 1].extend(batch.iter().copied());
                }
                subsystem2.push(FileBatch { solvers: t.clone(), helper: Some(h), files: batch });
            }
        }
    }
    debug_assert_eq!(next_file, task.n + 1);
    Ok(Placement::assemble(task.n, n1, subsystem1, subsystem2, files))
}

/// `max_k |M_k| / N`.
pub fn peak_computation_load(placement: &Placement, n: usize) -> Rational {
    frac(placement.max_files_per_node(), n)
}
