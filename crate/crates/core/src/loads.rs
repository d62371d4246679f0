//! Communication loads of the two subsystems, their lower convex envelopes,
//! and the execution-time formulas for CDC, ACDC and the hybrid scheme.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::{binom, frac, int, max_rational, Rational};
use crate::model::{Allocation, SystemParams, TaskParams};

/// Per-phase times under sequential Map, Shuffle, Reduce.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TimeBreakdown {
    #[serde(serialize_with = "ser_rational")]
    pub t_map: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub t_shuffle: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub t_reduce: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub t_total: Rational,
}

pub(crate) fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::math::fmt_exact(r))
}

impl TimeBreakdown {
    pub fn new(t_map: Rational, t_shuffle: Rational, t_reduce: Rational) -> Self {
        let t_total = &t_map + &t_shuffle + &t_reduce;
        Self { t_map, t_shuffle, t_reduce, t_total }
    }

    pub fn scaled(&self, lambda: &Rational) -> Self {
        Self::new(&self.t_map * lambda, &self.t_shuffle * lambda, &self.t_reduce * lambda)
    }
}

fn check_load_args(r: usize, s: usize, k: usize) -> Result<()> {
    if r > k || s == 0 || s > k {
        return Err(Error::InvalidParams(format!(
            "load needs 0 <= r <= K and 1 <= s <= K (r = {r}, s = {s}, K = {k})"
        )));
    }
    Ok(())
}

/// Shared summation over `l = max(r+1, s) ..= min(r+s, K)`; `weight(l)` is
/// the per-term multiplier applied to
/// `C(K,l) C(l-1,r) C(r,l-s) / (C(K,r) C(K,s))`.
fn load_sum(r: usize, s: usize, k: usize, weight: impl Fn(usize) -> Rational) -> Rational {
    let (r_, s_, k_) = (r as i64, s as i64, k as i64);
    let den = binom(k_, r_) * binom(k_, s_);
    let lo = (r + 1).max(s);
    let hi = (r + s).min(k);
    let mut total = Rational::zero();
    for l in lo..=hi {
        let l_ = l as i64;
        let num = binom(k_, l_) * binom(l_ - 1, r_) * binom(r_, l_ - s_);
        total += Rational::new(num, den.clone()) * weight(l);
    }
    total
}

/// Load of the solver-only subsystem with per-file replication `r1`.
pub fn l1(r1: usize, s: usize, k: usize) -> Result<Rational> {
    check_load_args(r1, s, k)?;
    if r1 == 0 && s == 1 {
        return Err(Error::UndefinedLoad { r: r1, s });
    }
    Ok(load_sum(r1, s, k, |l| frac(l, l - 1)))
}

/// Load of the helper-assisted subsystem with solver replication `r2`.
pub fn l2(r2: usize, s: usize, k: usize) -> Result<Rational> {
    check_load_args(r2, s, k)?;
    Ok(load_sum(r2, s, k, |_| Rational::one()))
}

/// Lower convex envelope of a finite set of `(r, L)` points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadEnvelope {
    vertices: Vec<(usize, Rational)>,
}

/// Lower convex hull via the monotone chain; collinear middle points are
/// dropped.
pub fn envelope(points: &[(usize, Rational)]) -> Result<LoadEnvelope> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if points.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::InvalidParams("envelope points must be sorted by strictly increasing r".into()));
    }
    let mut hull: Vec<(usize, Rational)> = Vec::with_capacity(points.len());
    for p in points {
        while hull.len() >= 2 {
            let (x1, y1) = &hull[hull.len() - 2];
            let (x2, y2) = &hull[hull.len() - 1];
            // keep (x2, y2) only if it lies strictly below the chord to p
            let cross = int(*x2 as i64 - *x1 as i64) * (&p.1 - y1) - (y2 - y1) * int(p.0 as i64 - *x1 as i64);
            if cross <= Rational::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p.clone());
    }
    Ok(LoadEnvelope { vertices: hull })
}

impl LoadEnvelope {
    pub fn vertices(&self) -> &[(usize, Rational)] {
        &self.vertices
    }

    pub fn domain(&self) -> (usize, usize) {
        (self.vertices[0].0, self.vertices[self.vertices.len() - 1].0)
    }

    /// Piecewise-linear interpolation between hull vertices.
    pub fn eval(&self, r: &Rational) -> Result<Rational> {
        let (lo, hi) = self.domain();
        if *r < int(lo) || *r > int(hi) {
            return Err(Error::InvalidParams(format!("envelope evaluated at {r} outside [{lo}, {hi}]")));
        }
        if self.vertices.len() == 1 {
            return Ok(self.vertices[0].1.clone());
        }
        for w in self.vertices.windows(2) {
            let (x1, y1) = (&w[0].0, &w[0].1);
            let (x2, y2) = (&w[1].0, &w[1].1);
            if *r <= int(*x2) {
                let t = (r - int(*x1)) / int(x2 - x1);
                return Ok(y1 + (y2 - y1) * t);
            }
        }
        unreachable!("r within domain")
    }

    pub fn eval_at(&self, r: usize) -> Result<Rational> {
        self.eval(&int(r))
    }
}

/// Envelope of `{(r, l1(r, s, ks))}` over every `r` where the load is
/// defined (`r = 0` is excluded for `s = 1`).
pub fn l1_envelope(s: usize, ks: usize) -> Result<LoadEnvelope> {
    let start = if s == 1 { 1 } else { 0 };
    let pts = (start..=ks).map(|r| l1(r, s, ks).map(|l| (r, l))).collect::<Result<Vec<_>>>()?;
    envelope(&pts)
}

/// Envelope of `{(r, l2(r, s, ks)) : r = 0..=ks}`.
pub fn l2_envelope(s: usize, ks: usize) -> Result<LoadEnvelope> {
    let pts = (0..=ks).map(|r| l2(r, s, ks).map(|l| (r, l))).collect::<Result<Vec<_>>>()?;
    envelope(&pts)
}

/// Execution time of plain CDC on `kc` nodes with replication `r1`. For
/// `s > 1` this is the cascaded generalization.
pub fn exec_time_cdc(r1: usize, kc: usize, task: &TaskParams, system: &SystemParams) -> Result<TimeBreakdown> {
    let bad = |m: String| Err(Error::InfeasibleParams(m));
    if r1 == 0 || r1 > kc {
        return bad(format!("need 1 <= r1 <= Kc (r1 = {r1}, Kc = {kc})"));
    }
    if kc > system.k {
        return bad(format!("Kc = {kc} exceeds K = {}", system.k));
    }
    if task.s > kc {
        return bad(format!("s = {} exceeds Kc = {kc}", task.s));
    }
    if r1 * task.n > system.m {
        return bad(format!("r1 = {r1} exceeds M/N = {}/{}", system.m, task.n));
    }
    Ok(TimeBreakdown::new(
        &system.c_m * frac(r1, kc),
        &system.c_s * l1(r1, task.s, kc)?,
        &system.c_r * frac(task.s * task.q, kc),
    ))
}

/// Execution time of ACDC with `ks` solvers, `kh` helpers and solver
/// replication `r2`.
pub fn exec_time_acdc(
    r2: usize,
    ks: usize,
    kh: usize,
    task: &TaskParams,
    system: &SystemParams,
) -> Result<TimeBreakdown> {
    let bad = |m: String| Err(Error::InfeasibleParams(m));
    if ks == 0 || kh == 0 {
        return bad("ACDC needs at least one solver and one helper".into());
    }
    if ks + kh > system.k {
        return bad(format!("Ks + Kh = {} exceeds K = {}", ks + kh, system.k));
    }
    if r2 > ks {
        return bad(format!("r2 = {r2} exceeds Ks = {ks}"));
    }
    if task.s > ks {
        return bad(format!("s = {} exceeds Ks = {ks}", task.s));
    }
    if (r2 + 1) * task.n > system.m {
        return bad(format!("r2 + 1 = {} exceeds M/N = {}/{}", r2 + 1, system.m, task.n));
    }
    let map = max_rational(&frac(r2, ks), &frac(1, kh)).clone();
    Ok(TimeBreakdown::new(
        &system.c_m * map,
        &system.c_s * l2(r2, task.s, ks)?,
        &system.c_r * frac(task.s * task.q, ks),
    ))
}

/// Hybrid execution time with the given per-subsystem load functions. The
/// helper arm of the map term vanishes when `alpha = 1`, whatever `Kh` is.
pub(crate) fn hybrid_time_with(
    alloc: &Allocation,
    task: &TaskParams,
    system: &SystemParams,
    load1: impl Fn(usize) -> Result<Rational>,
    load2: impl Fn(usize) -> Result<Rational>,
) -> Result<TimeBreakdown> {
    let alpha = &alloc.alpha;
    let alpha_bar = alloc.alpha_bar();
    let solver_arm = (alpha * int(alloc.r1) + &alpha_bar * int(alloc.r2)) / int(alloc.ks);
    let helper_arm = if alpha_bar.is_zero() { Rational::zero() } else { &alpha_bar / int(alloc.kh) };
    let mut shuffle = Rational::zero();
    if !alpha.is_zero() {
        shuffle += alpha * load1(alloc.r1)?;
    }
    if !alpha_bar.is_zero() {
        shuffle += &alpha_bar * load2(alloc.r2)?;
    }
    Ok(TimeBreakdown::new(
        &system.c_m * max_rational(&solver_arm, &helper_arm),
        &system.c_s * shuffle,
        &system.c_r * frac(task.s * task.q, alloc.ks),
    ))
}

/// Hybrid execution time using the envelope loads.
pub fn exec_time_hybrid(
    alloc: &Allocation,
    task: &TaskParams,
    system: &SystemParams,
    env1: &LoadEnvelope,
    env2: &LoadEnvelope,
) -> Result<TimeBreakdown> {
    alloc.validate(task, system)?;
    hybrid_time_with(alloc, task, system, |r| env1.eval_at(r), |r| env2.eval_at(r))
}

/// Hybrid execution time using the raw (vertex) loads, the value a concrete
/// scheme run realizes.
pub fn exec_time_hybrid_raw(alloc: &Allocation, task: &TaskParams, system: &SystemParams) -> Result<TimeBreakdown> {
    alloc.validate(task, system)?;
    hybrid_time_with(alloc, task, system, |r| l1(r, task.s, alloc.ks), |r| l2(r, task.s, alloc.ks))
}

/// Resource levels beyond which plain ACDC is already optimal (single-copy
/// reduce only).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcdcThreshold {
    pub r2: usize,
    /// `None` when the minimizing `r2` is 0, a case the threshold does not
    /// cover.
    pub k_prime: Option<usize>,
    pub m_prime: usize,
}

pub fn acdc_sufficiency_threshold(task: &TaskParams, system: &SystemParams) -> Result<AcdcThreshold> {
    if task.s != 1 {
        return Err(Error::UnsupportedS(task.s));
    }
    let q = task.q;
    let objective = |r: usize| &system.c_m * frac(r, q) + &system.c_s * frac(1, r + 1) * (Rational::one() - frac(r, q));
    let mut best = 0;
    let mut best_val = objective(0);
    for r in 1..=q {
        let v = objective(r);
        if v < best_val {
            best = r;
            best_val = v;
        }
    }
    let k_prime = if best == q {
        Some(q)
    } else if best > 0 {
        Some(q + q.div_ceil(best))
    } else {
        None
    };
    Ok(AcdcThreshold { r2: best, k_prime, m_prime: (best + 1) * task.n })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(k: usize, m: usize, cm: i64, cs: i64, cr: i64) -> SystemParams {
        SystemParams::new(k, m, int(cm), int(cs), int(cr)).unwrap()
    }

    #[test]
    fn l1_values() {
        assert_eq!(l1(1, 1, 3).unwrap(), frac(2, 3));
        assert_eq!(l1(1, 2, 3).unwrap(), int(1));
        for k in 1..=6 {
            for s in 1..=k {
                assert_eq!(l1(k, s, k).unwrap(), int(0));
            }
        }
        assert!(matches!(l1(0, 1, 3), Err(Error::UndefinedLoad { .. })));
        assert_eq!(l1(0, 2, 3).unwrap(), int(2));
    }

    #[test]
    fn l2_values() {
        assert_eq!(l2(1, 1, 3).unwrap(), frac(1, 3));
        for k in 1..=8 {
            assert_eq!(l2(0, 1, k).unwrap(), int(1));
        }
        // frozen from an independent Fraction evaluation of the summation
        assert_eq!(l2(1, 2, 3).unwrap(), frac(5, 9));
        assert_eq!(l2(3, 2, 3).unwrap(), int(0));
    }

    #[test]
    fn load_args_rejected() {
        assert!(l1(4, 1, 3).is_err());
        assert!(l2(1, 0, 3).is_err());
        assert!(l2(1, 4, 3).is_err());
    }

    #[test]
    fn envelope_keeps_convex_points() {
        let e = envelope(&[(0, int(1)), (1, frac(1, 2)), (2, int(0))]).unwrap();
        // (1, 1/2) is collinear with the endpoints and is dropped
        assert_eq!(e.vertices().len(), 2);
        assert_eq!(e.eval_at(1).unwrap(), frac(1, 2));
        let e = envelope(&[(0, int(1)), (1, frac(1, 3)), (2, int(0))]).unwrap();
        assert_eq!(e.vertices().len(), 3);
    }

    #[test]
    fn envelope_drops_points_above_chord() {
        let e = envelope(&[(0, int(1)), (1, frac(9, 10)), (2, int(0))]).unwrap();
        assert_eq!(e.vertices(), &[(0, int(1)), (2, int(0))]);
        assert_eq!(e.eval_at(1).unwrap(), frac(1, 2));
        assert_eq!(e.eval(&frac(1, 2)).unwrap(), frac(3, 4));
        assert!(e.eval_at(3).is_err());
    }

    #[test]
    fn envelope_errors() {
        assert!(matches!(envelope(&[]), Err(Error::EmptyInput)));
        assert!(envelope(&[(1, int(0)), (1, int(1))]).is_err());
    }

    #[test]
    fn l1_envelope_matches_convex_s1_curve() {
        let e = l1_envelope(1, 6).unwrap();
        for r in 1..=6 {
            assert_eq!(e.eval_at(r).unwrap(), l1(r, 1, 6).unwrap());
        }
    }

    #[test]
    fn cdc_times() {
        let t = TaskParams::new(4, 4, 1, 8).unwrap();
        let tb = exec_time_cdc(1, 3, &t, &sys(3, 12, 2, 1, 1)).unwrap();
        assert_eq!(tb.t_map, frac(2, 3));
        assert_eq!(tb.t_shuffle, frac(2, 3));
        assert_eq!(tb.t_total, frac(8, 3));
        let tb = exec_time_cdc(1, 6, &t, &sys(6, 12, 2, 1, 0)).unwrap();
        assert_eq!(tb.t_total, frac(7, 6));
        let tb = exec_time_cdc(3, 3, &t, &sys(3, 12, 2, 1, 1)).unwrap();
        assert_eq!(tb.t_shuffle, int(0));
        assert_eq!(tb.t_total, int(2) + frac(4, 3));
        assert!(exec_time_cdc(4, 4, &t, &sys(4, 12, 2, 1, 1)).is_err());
    }

    #[test]
    fn acdc_times() {
        let t = TaskParams::new(4, 4, 1, 8).unwrap();
        let s1 = sys(3, 12, 2, 1, 1);
        assert_eq!(exec_time_acdc(1, 2, 1, &t, &s1).unwrap().t_total, frac(9, 4) + int(2));
        assert_eq!(exec_time_acdc(0, 2, 1, &t, &s1).unwrap().t_total, int(5));
        assert_eq!(exec_time_acdc(0, 1, 2, &t, &s1).unwrap().t_total, int(6));
        let s2 = sys(6, 12, 2, 1, 0);
        assert_eq!(exec_time_acdc(1, 3, 3, &t, &s2).unwrap().t_total, int(1));
        assert!(exec_time_acdc(1, 3, 0, &t, &s2).is_err());
    }

    #[test]
    fn hybrid_reduces_to_pure_schemes() {
        let t = TaskParams::new(4, 4, 1, 8).unwrap();
        let s = sys(6, 12, 2, 1, 0);
        let e1 = l1_envelope(1, 3).unwrap();
        let e2 = l2_envelope(1, 3).unwrap();
        let cdc = exec_time_hybrid(&Allocation::new(int(1), 2, 0, 3, 0), &t, &s, &e1, &e2).unwrap();
        assert_eq!(cdc, exec_time_cdc(2, 3, &t, &s).unwrap());
        let acdc = exec_time_hybrid(&Allocation::new(int(0), 1, 1, 3, 3), &t, &s, &e1, &e2).unwrap();
        assert_eq!(acdc, exec_time_acdc(1, 3, 3, &t, &s).unwrap());
        let mixed = exec_time_hybrid(&Allocation::new(frac(1, 2), 1, 1, 3, 3), &t, &s, &e1, &e2).unwrap();
        assert_eq!(mixed.t_total, frac(7, 6));
    }

    #[test]
    fn acdc_threshold() {
        let t = TaskParams::new(4, 4, 1, 8).unwrap();
        let th = acdc_sufficiency_threshold(&t, &sys(8, 8, 2, 1, 0)).unwrap();
        // objective over r = 0..4: 1, 7/8, 7/6, 25/16, 2
        assert_eq!(th, AcdcThreshold { r2: 1, k_prime: Some(8), m_prime: 8 });
        let th = acdc_sufficiency_threshold(&t, &sys(8, 8, 1, 1000, 0)).unwrap();
        assert_eq!(th.r2, 4);
        assert_eq!(th.k_prime, Some(4));
        assert_eq!(th.m_prime, 20);
        let th =
            acdc_sufficiency_threshold(&t, &SystemParams::new(8, 8, int(1), frac(1, 100), int(0)).unwrap()).unwrap();
        assert_eq!(th.r2, 0);
        assert_eq!(th.k_prime, None);
        let t2 = TaskParams::new(4, 4, 2, 8).unwrap();
        assert!(matches!(acdc_sufficiency_threshold(&t2, &sys(8, 8, 2, 1, 0)), Err(Error::UnsupportedS(2))));
    }
}
