//! Allocation planner: exhaustive search over `(Ks, Kh, r1, r2)` with an
//! exact one-dimensional minimization over `alpha`, the pure CDC and ACDC
//! baselines, the closed-form CDC allocation, and parameter sweeps.

use std::cmp::Ordering;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::loads::{
    exec_time_acdc, exec_time_cdc, hybrid_time_with, l1, l1_envelope, l2, l2_envelope, LoadEnvelope, TimeBreakdown,
};
use crate::math::{frac, int, Rational};
use crate::model::{divisibility_report, Allocation, SystemParams, TaskParams};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PlanOptions {
    /// Restrict to allocations the simulator can execute (integral file
    /// split, all batch counts divide) and price them at raw loads.
    pub require_simulatable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    pub alloc: Allocation,
    /// Objective value the search minimized (envelope loads by default).
    pub time: TimeBreakdown,
    /// The same allocation priced at raw loads.
    pub raw_time: TimeBreakdown,
    pub simulatable: bool,
    /// Best few dominated candidates, ascending by time.
    pub runner_ups: Vec<(Allocation, Rational)>,
}

const RUNNER_UPS: usize = 5;

/// Per-`Ks` load tables indexed by `r`; `None` where a load is undefined.
struct LoadTable {
    load1: Vec<Option<Rational>>,
    load2: Vec<Rational>,
}

impl LoadTable {
    fn envelope(s: usize, ks: usize) -> Result<Self> {
        let e1 = l1_envelope(s, ks)?;
        let e2 = l2_envelope(s, ks)?;
        Ok(Self {
            load1: (0..=ks).map(|r| e1.eval_at(r).ok()).collect(),
            load2: (0..=ks).map(|r| e2.eval_at(r)).collect::<Result<_>>()?,
        })
    }

    fn raw(s: usize, ks: usize) -> Result<Self> {
        Ok(Self {
            load1: (0..=ks).map(|r| l1(r, s, ks).ok()).collect(),
            load2: (0..=ks).map(|r| l2(r, s, ks)).collect::<Result<_>>()?,
        })
    }
}

fn time_from_table(
    alloc: &Allocation,
    task: &TaskParams,
    system: &SystemParams,
    t: &LoadTable,
) -> Result<TimeBreakdown> {
    hybrid_time_with(
        alloc,
        task,
        system,
        |r| t.load1[r].clone().ok_or(Error::UndefinedLoad { r, s: task.s }),
        |r| Ok(t.load2[r].clone()),
    )
}

/// Feasible `alpha` interval `[lo, hi]` under the storage budget, or `None`.
fn alpha_interval(r1: usize, r2: usize, kh: usize, m_over_n: &Rational) -> Option<(Rational, Rational)> {
    let (mut lo, mut hi) = (Rational::zero(), Rational::one());
    if kh == 0 {
        lo = Rational::one();
    }
    // storage: (r2 + 1) + alpha (r1 - r2 - 1) <= M/N
    let base = int(r2 + 1);
    let slope = int(r1 as i64 - r2 as i64 - 1);
    let slack = m_over_n - &base;
    match slope.cmp(&Rational::zero()) {
        Ordering::Equal => {
            if slack < Rational::zero() {
                return None;
            }
        }
        Ordering::Greater => hi = hi.min(slack / slope),
        Ordering::Less => lo = lo.max(slack / slope),
    }
    (lo <= hi).then_some((lo, hi))
}

/// Exact minimum over `alpha` for fixed discrete variables. The objective is
/// piecewise linear and convex in `alpha`, so the interval endpoints and the
/// breakpoint where the two map-time arms meet cover every minimizer; ties go
/// to the smaller `alpha`.
#[allow(clippy::too_many_arguments)]
pub fn optimize_alpha(
    r1: usize,
    r2: usize,
    ks: usize,
    kh: usize,
    task: &TaskParams,
    system: &SystemParams,
    env1: &LoadEnvelope,
    env2: &LoadEnvelope,
) -> Result<(Rational, TimeBreakdown)> {
    optimize_alpha_with(r1, r2, ks, kh, task, system, |a| {
        hybrid_time_with(a, task, system, |r| env1.eval_at(r), |r| env2.eval_at(r))
    })
}

fn optimize_alpha_with(
    r1: usize,
    r2: usize,
    ks: usize,
    kh: usize,
    task: &TaskParams,
    system: &SystemParams,
    eval: impl Fn(&Allocation) -> Result<TimeBreakdown>,
) -> Result<(Rational, TimeBreakdown)> {
    let m_over_n = system.storage_ratio(task);
    let (lo, hi) = alpha_interval(r1, r2, kh, &m_over_n)
        .ok_or_else(|| Error::Infeasible(format!("no alpha satisfies the storage budget for r1={r1} r2={r2}")))?;
    let mut candidates = vec![lo.clone(), hi.clone()];
    if kh > 0 {
        // (alpha r1 + (1-alpha) r2)/Ks = (1-alpha)/Kh
        let den = frac(r1 as i64 - r2 as i64, ks) + frac(1, kh);
        if !den.is_zero() {
            let a = (frac(1, kh) - frac(r2, ks)) / den;
            if a >= lo && a <= hi {
                candidates.push(a);
            }
        }
    }
    let store_slope = int(r1 as i64 - r2 as i64 - 1);
    if !store_slope.is_zero() {
        let a = (&m_over_n - int(r2 + 1)) / store_slope;
        if a >= lo && a <= hi {
            candidates.push(a);
        }
    }
    candidates.sort();
    candidates.dedup();
    let mut best: Option<(Rational, TimeBreakdown)> = None;
    for a in candidates {
        let alloc = Allocation::new(a.clone(), r1, r2, ks, kh);
        let t = eval(&alloc)?;
        if best.as_ref().is_none_or(|(_, bt)| t.t_total < bt.t_total) {
            best = Some((a, t));
        }
    }
    Ok(best.expect("interval is nonempty"))
}

fn better(a: &(Allocation, TimeBreakdown), b: &(Allocation, TimeBreakdown)) -> Ordering {
    a.1.t_total.cmp(&b.1.t_total).then_with(|| a.0.cmp(&b.0))
}

/// Minimum-time hybrid allocation.
pub fn optimize(task: &TaskParams, system: &SystemParams, options: PlanOptions) -> Result<Plan> {
    task.validate()?;
    system.validate()?;
    system.check_storage(task)?;
    let ks_lo = task.s.max(1);
    let ks_hi = system.k.min(task.q);
    let mut tuples = Vec::new();
    for ks in ks_lo..=ks_hi {
        for kh in 0..=system.k - ks {
            for r1 in 1..=ks {
                for r2 in 0..=ks {
                    tuples.push((ks, kh, r1, r2));
                }
            }
        }
    }
    let tables: Vec<Option<(LoadTable, LoadTable)>> = (0..=ks_hi)
        .map(|ks| {
            if ks < ks_lo {
                return Ok(None);
            }
            Ok(Some((LoadTable::envelope(task.s, ks)?, LoadTable::raw(task.s, ks)?)))
        })
        .collect::<Result<_>>()?;

    let mut found: Vec<(Allocation, TimeBreakdown)> = tuples
        .par_iter()
        .filter_map(|&(ks, kh, r1, r2)| {
            let (env, raw) = tables[ks].as_ref().expect("table built for every Ks");
            if options.require_simulatable {
                best_simulatable(r1, r2, ks, kh, task, system, raw)
            } else {
                optimize_alpha_with(r1, r2, ks, kh, task, system, |a| time_from_table(a, task, system, env))
                    .ok()
                    .map(|(a, t)| (Allocation::new(a, r1, r2, ks, kh), t))
            }
        })
        .collect();
    if found.is_empty() {
        return Err(Error::Infeasible(
            if options.require_simulatable {
                "no simulatable allocation satisfies the resource constraints"
            } else {
                "no allocation satisfies the resource constraints"
            }
            .into(),
        ));
    }
    found.sort_by(better);
    let mut ranked = found.into_iter();
    let (alloc, time) = ranked.next().expect("nonempty");
    let raw = &tables[alloc.ks].as_ref().expect("table").1;
    let raw_time = time_from_table(&alloc, task, system, raw)?;
    let simulatable = divisibility_report(&alloc, task).is_empty();
    let mut seen = std::collections::BTreeSet::from([operational(&alloc)]);
    let runner_ups =
        ranked.filter(|(a, _)| seen.insert(operational(a))).take(RUNNER_UPS).map(|(a, t)| (a, t.t_total)).collect();
    Ok(Plan { alloc, time, raw_time, simulatable, runner_ups })
}

/// Collapses fields with no effect on the run: `r1` when `alpha = 0`, and
/// `r2`, `Kh` when `alpha = 1`.
fn operational(a: &Allocation) -> Allocation {
    let mut a = a.clone();
    if a.alpha.is_zero() {
        a.r1 = 0;
    }
    if a.alpha.is_one() {
        a.r2 = 0;
        a.kh = 0;
    }
    a
}

fn best_simulatable(
    r1: usize,
    r2: usize,
    ks: usize,
    kh: usize,
    task: &TaskParams,
    system: &SystemParams,
    raw: &LoadTable,
) -> Option<(Allocation, TimeBreakdown)> {
    let mut best: Option<(Allocation, TimeBreakdown)> = None;
    for i in 0..=task.n {
        let alloc = Allocation::new(frac(i, task.n), r1, r2, ks, kh);
        if alloc.validate(task, system).is_err() || !divisibility_report(&alloc, task).is_empty() {
            continue;
        }
        let Ok(t) = time_from_table(&alloc, task, system, raw) else { continue };
        if best.as_ref().is_none_or(|(_, bt)| t.t_total < bt.t_total) {
            best = Some((alloc, t));
        }
    }
    best
}

/// A pure-scheme operating point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureCandidate {
    pub ks: usize,
    pub kh: usize,
    pub r: usize,
    pub time: TimeBreakdown,
}

impl PureCandidate {
    fn key(&self) -> (&Rational, usize, usize, usize) {
        (&self.time.t_total, self.ks, self.kh, self.r)
    }
}

/// Every feasible plain-CDC point: `Kc` active nodes (`s <= Kc <= K`),
/// replication `1 <= r1 <= Kc` within the storage budget.
pub fn cdc_candidates(task: &TaskParams, system: &SystemParams) -> Vec<PureCandidate> {
    let mut out = Vec::new();
    for kc in task.s.max(1)..=system.k {
        for r1 in 1..=kc {
            if let Ok(time) = exec_time_cdc(r1, kc, task, system) {
                out.push(PureCandidate { ks: kc, kh: 0, r: r1, time });
            }
        }
    }
    out
}

/// Every feasible plain-ACDC point using all `K` nodes: `Ks` solvers
/// (`max(1,s) <= Ks <= min(K-1, Q)`), `Kh = K - Ks` helpers, and solver
/// replication `r2 < Ks` within the storage budget.
pub fn acdc_candidates(task: &TaskParams, system: &SystemParams) -> Vec<PureCandidate> {
    let mut out = Vec::new();
    let hi = system.k.saturating_sub(1).min(task.q);
    for ks in task.s.max(1)..=hi {
        let kh = system.k - ks;
        for r2 in 0..ks {
            if let Ok(time) = exec_time_acdc(r2, ks, kh, task, system) {
                out.push(PureCandidate { ks, kh, r: r2, time });
            }
        }
    }
    out
}

fn best_of(cands: Vec<PureCandidate>, what: &str) -> Result<PureCandidate> {
    cands
        .into_iter()
        .min_by(|a, b| a.key().cmp(&b.key()))
        .ok_or_else(|| Error::Infeasible(format!("no feasible {what} configuration")))
}

pub fn best_cdc(task: &TaskParams, system: &SystemParams) -> Result<PureCandidate> {
    best_of(cdc_candidates(task, system), "CDC")
}

pub fn best_acdc(task: &TaskParams, system: &SystemParams) -> Result<PureCandidate> {
    best_of(acdc_candidates(task, system), "ACDC")
}

/// Which branch of the closed-form CDC table applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AnalyticCase {
    /// Communication cheap: minimal replication on all nodes.
    MinReplication,
    /// Interior optimum `r1 = sqrt(K c_s / c_m)`.
    Interior,
    /// Storage-bound replication on all nodes.
    StorageBound,
    /// Full replication on `M/N` nodes.
    StorageFull,
    /// Full replication on all nodes.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalyticAllocation {
    pub r1: f64,
    pub ks: f64,
    pub case: AnalyticCase,
    /// True when the cost ratio sits exactly on a boundary between cases.
    pub boundary: bool,
}

/// Continuous-relaxation CDC objective `c_m r/Ks + c_s (1/r)(1 - r/Ks)`
/// with reduce time ignored.
pub fn cdc_relaxed_objective(r: f64, ks: f64, c_m: f64, c_s: f64) -> f64 {
    c_m * r / ks + c_s / r * (1.0 - r / ks)
}

/// Closed-form optimal CDC replication and solver count when integrality
/// and reduce time are ignored, with `Kmax = min(K, Q)` and `m = M/N`:
///
/// | condition                                   | `(r1, Ks)`                 |
/// |---------------------------------------------|----------------------------|
/// | `rho <= 1/Kmax`                             | `(1, Kmax)`                |
/// | `Kmax <= m`, `1/Kmax <= rho <= Kmax`        | `(sqrt(Kmax rho), Kmax)`   |
/// | `Kmax >= m`, `1/Kmax <= rho <= m^2/Kmax`    | `(sqrt(Kmax rho), Kmax)`   |
/// | `Kmax >= m`, `m^2/Kmax <= rho <= m`         | `(m, Kmax)`                |
/// | `Kmax >= m`, `rho >= m`                     | `(m, m)`                   |
/// | `Kmax <= m`, `rho >= Kmax`                  | `(Kmax, Kmax)`             |
///
/// where `rho = c_s / c_m`.
pub fn analytic_cdc_allocation(task: &TaskParams, system: &SystemParams) -> Result<AnalyticAllocation> {
    if task.s != 1 {
        return Err(Error::UnsupportedS(task.s));
    }
    let kmax = system.k.min(task.q);
    let kq = int(kmax);
    let m = system.storage_ratio(task);
    let rho = &system.c_s / &system.c_m;
    let kf = kmax as f64;
    let mf = crate::math::to_f64(&m);
    let interior = (kf * crate::math::to_f64(&rho)).sqrt();
    let inv_k = Rational::one() / &kq;
    let m_sq_over_k = &m * &m / &kq;

    let (r1, ks, case, boundary) = if rho <= inv_k {
        (1.0, kf, AnalyticCase::MinReplication, rho == inv_k)
    } else if kq <= m {
        if rho <= kq {
            (interior, kf, AnalyticCase::Interior, rho == kq)
        } else {
            (kf, kf, AnalyticCase::Full, false)
        }
    } else if rho <= m_sq_over_k {
        (interior, kf, AnalyticCase::Interior, rho == m_sq_over_k)
    } else if rho <= m {
        (mf, kf, AnalyticCase::StorageBound, rho == m)
    } else {
        (mf, mf, AnalyticCase::StorageFull, false)
    };
    Ok(AnalyticAllocation { r1, ks, case, boundary })
}

/// Parameter a sweep can vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    K,
    M,
    N,
    Q,
    S,
    CM,
    CS,
    CR,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "K" => Self::K,
            "M" => Self::M,
            "N" => Self::N,
            "Q" => Self::Q,
            "s" => Self::S,
            "c_m" => Self::CM,
            "c_s" => Self::CS,
            "c_r" => Self::CR,
            other => {
                return Err(Error::Parse(format!(
                    "unknown sweep parameter {other:?} (expected K, M, N, Q, s, c_m, c_s or c_r)"
                )))
            }
        })
    }
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            Self::K => "K",
            Self::M => "M",
            Self::N => "N",
            Self::Q => "Q",
            Self::S => "s",
            Self::CM => "c_m",
            Self::CS => "c_s",
            Self::CR => "c_r",
        }
    }

    /// Copies of `task` and `system` with this parameter set to `value`.
    pub fn apply(
        self,
        value: &Rational,
        task: &TaskParams,
        system: &SystemParams,
    ) -> Result<(TaskParams, SystemParams)> {
        let (mut t, mut s) = (task.clone(), system.clone());
        let whole = || {
            crate::math::as_usize(value).ok_or_else(|| {
                Error::InvalidParams(format!("{} must be a nonnegative integer, got {value}", self.name()))
            })
        };
        match self {
            Self::K => s.k = whole()?,
            Self::M => s.m = whole()?,
            Self::N => t.n = whole()?,
            Self::Q => t.q = whole()?,
            Self::S => t.s = whole()?,
            Self::CM => s.c_m = value.clone(),
            Self::CS => s.c_s = value.clone(),
            Self::CR => s.c_r = value.clone(),
        }
        t.validate()?;
        s.validate()?;
        Ok((t, s))
    }
}

/// One sweep row; `None` columns mark an infeasible scheme at that value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub value: Rational,
    pub cdc: Option<PureCandidate>,
    pub acdc: Option<PureCandidate>,
    pub hybrid: Option<Plan>,
    pub error: Option<String>,
}

pub fn sweep(
    task: &TaskParams,
    system: &SystemParams,
    param: SweepParam,
    values: &[Rational],
    options: PlanOptions,
) -> Vec<SweepRow> {
    values
        .iter()
        .map(|v| match param.apply(v, task, system) {
            Err(e) => SweepRow { value: v.clone(), cdc: None, acdc: None, hybrid: None, error: Some(e.to_string()) },
            Ok((t, s)) => {
                let hybrid = optimize(&t, &s, options);
                SweepRow {
                    value: v.clone(),
                    cdc: best_cdc(&t, &s).ok(),
                    acdc: best_acdc(&t, &s).ok(),
                    error: hybrid.as_ref().err().map(ToString::to_string),
                    hybrid: hybrid.ok(),
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(k: usize, m: usize, cm: i64, cs: i64, cr: i64) -> SystemParams {
        SystemParams::new(k, m, int(cm), int(cs), int(cr)).unwrap()
    }

    #[test]
    fn alpha_interval_cases() {
        assert_eq!(alpha_interval(1, 1, 1, &int(3)), Some((int(0), int(1))));
        // storage-tight: M/N = r2 + 1 < r1 leaves alpha = 0 only
        assert_eq!(alpha_interval(3, 1, 1, &int(2)), Some((int(0), int(0))));
        assert_eq!(alpha_interval(3, 2, 1, &int(2)), None);
        assert_eq!(alpha_interval(1, 3, 1, &int(2)), Some((frac(2, 3), int(1))));
        assert_eq!(alpha_interval(2, 0, 0, &int(3)), Some((int(1), int(1))));
    }

    #[test]
    fn alpha_optimum_example_two() {
        let t = TaskParams::new(4, 4, 1, 8).unwrap();
        let s = sys(6, 12, 2, 1, 0);
        let (e1, e2) = (l1_envelope(1, 3).unwrap(), l2_envelope(1, 3).unwrap());
        let (a, tb) = optimize_alpha(1, 1, 3, 3, &t, &s, &e1, &e2).unwrap();
        assert_eq!(a, int(0));
        assert_eq!(tb.t_total, int(1));
    }

    #[test]
    fn alpha_breakpoint_can_win() {
        // r1 = 3 = Ks, r2 = 0: map arms cross at alpha = 1/2 with one helper
        let t = TaskParams::new(4, 3, 1, 8).unwrap();
        let s = SystemParams::new(4, 16, int(1), frac(1, 4), int(0)).unwrap();
        let (e1, e2) = (l1_envelope(1, 3).unwrap(), l2_envelope(1, 3).unwrap());
        let (a, _) = optimize_alpha(3, 0, 3, 1, &t, &s, &e1, &e2).unwrap();
        let arms_meet = frac(3, 1) / int(3) * &a;
        assert_eq!(arms_meet, int(1) - &a);
    }

    #[test]
    fn example_one() {
        let t = TaskParams::new(4, 4, 1, 8).unwrap();
        let s = sys(3, 12, 2, 1, 1);
        let cdc = best_cdc(&t, &s).unwrap();
        assert_eq!((cdc.ks, cdc.r, cdc.time.t_total.clone()), (3, 1, frac(8, 3)));
        let acdc: Vec<_> = acdc_candidates(&t, &s).into_iter().map(|c| (c.r, c.ks, c.kh, c.time.t_total)).collect();
        assert_eq!(acdc, vec![(0, 1, 2, int(6)), (0, 2, 1, int(5)), (1, 2, 1, frac(17, 4))]);
        let plan = optimize(&t, &s, PlanOptions::default()).unwrap();
        assert!(plan.time.t_total <= frac(8, 3));
    }

    #[test]
    fn storage_equal_to_files_allows_single_copies_only() {
        // M = N leaves one copy per file: r1 = 1 on the solver side, or the
        // helper copy alone (r2 = 0)
        let t = TaskParams::new(4, 4, 1, 8).unwrap();
        let s = sys(4, 4, 2, 1, 0);
        let plan = optimize(&t, &s, PlanOptions::default()).unwrap();
        assert_eq!(plan.alloc.storage_per_file(), int(1));
        assert!(plan.alloc.alpha == int(0) || plan.alloc.r1 == 1);
        assert!(plan.alloc.alpha == int(1) || plan.alloc.r2 == 0);
        let cdc = cdc_candidates(&t, &s);
        assert!(cdc.iter().all(|c| c.r == 1));
        assert!(cdc.iter().all(|c| plan.time.t_total <= c.time.t_total));
    }

    #[test]
    fn simulatable_plans_are_divisible() {
        let t = TaskParams::new(6, 6, 1, 6).unwrap();
        let s = sys(5, 18, 2, 1, 0);
        let plan = optimize(&t, &s, PlanOptions { require_simulatable: true }).unwrap();
        assert!(plan.simulatable);
        assert!(divisibility_report(&plan.alloc, &t).is_empty());
        assert_eq!(plan.time, plan.raw_time);
        let free = optimize(&t, &s, PlanOptions::default()).unwrap();
        assert!(free.time.t_total <= plan.time.t_total);
    }

    #[test]
    fn infeasible_storage() {
        let t = TaskParams::new(4, 4, 1, 8).unwrap();
        assert!(matches!(optimize(&t, &sys(3, 3, 1, 1, 0), PlanOptions::default()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn analytic_cases() {
        let t = TaskParams::new(10, 10, 1, 8).unwrap();
        let a = analytic_cdc_allocation(&t, &SystemParams::new(5, 100, int(10), int(1), int(0)).unwrap()).unwrap();
        assert_eq!((a.r1, a.ks, a.case), (1.0, 5.0, AnalyticCase::MinReplication));
        let a = analytic_cdc_allocation(&t, &SystemParams::new(5, 100, int(1), int(10), int(0)).unwrap()).unwrap();
        assert_eq!((a.r1, a.ks, a.case), (5.0, 5.0, AnalyticCase::Full));
        let a = analytic_cdc_allocation(&t, &SystemParams::new(5, 100, int(1), frac(4, 5), int(0)).unwrap()).unwrap();
        assert_eq!(a.case, AnalyticCase::Interior);
        assert!((a.r1 - 2.0).abs() < 1e-12);
        let a = analytic_cdc_allocation(&t, &SystemParams::new(8, 20, int(1), int(1), int(0)).unwrap()).unwrap();
        assert_eq!((a.r1, a.ks, a.case), (2.0, 8.0, AnalyticCase::StorageBound));
        let a = analytic_cdc_allocation(&t, &SystemParams::new(8, 20, int(1), int(3), int(0)).unwrap()).unwrap();
        assert_eq!((a.r1, a.ks, a.case), (2.0, 2.0, AnalyticCase::StorageFull));
        let t2 = TaskParams::new(10, 10, 2, 8).unwrap();
        assert!(matches!(
            analytic_cdc_allocation(&t2, &SystemParams::new(5, 100, int(1), int(1), int(0)).unwrap()),
            Err(Error::UnsupportedS(2))
        ));
    }

    #[test]
    fn sweep_flags_bad_rows() {
        let t = TaskParams::new(4, 4, 1, 8).unwrap();
        let s = sys(3, 12, 2, 1, 0);
        let rows = sweep(&t, &s, SweepParam::M, &[int(2), int(12)], PlanOptions::default());
        assert!(rows[0].hybrid.is_none() && rows[0].error.is_some());
        assert!(rows[1].hybrid.is_some());
        let rows = sweep(&t, &s, SweepParam::S, &[int(5)], PlanOptions::default());
        assert!(rows[0].error.is_some());
    }
}
