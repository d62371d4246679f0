use std::collections::BTreeMap;

use hybrid_cdc::bounds::{enhanced_lower_bound, lemma1_bound, phase_lower_bounds, tally_a, tally_b};
use hybrid_cdc::loads::{exec_time_hybrid, l1, l1_envelope, l2, l2_envelope, LoadEnvelope};
use hybrid_cdc::math::{binom_usize, frac, int, Rational};
use hybrid_cdc::model::{divisibility_report, Allocation, SystemParams, TaskParams};
use hybrid_cdc::planner::{best_acdc, best_cdc, optimize, sweep, PlanOptions, SweepParam};
use hybrid_cdc::simulator::{layout, run, SimOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[allow(clippy::too_many_arguments)]
fn instance(
    n: usize,
    q: usize,
    s: usize,
    k: usize,
    m_ratio: usize,
    cm: i64,
    cs: i64,
    cr: i64,
) -> (TaskParams, SystemParams) {
    (TaskParams::new(n, q, s, 8).unwrap(), SystemParams::new(k, m_ratio * n, int(cm), int(cs), int(cr)).unwrap())
}

fn arb_instance() -> impl Strategy<Value = (TaskParams, SystemParams)> {
    (1usize..=12, 2usize..=12, 1usize..=3, 2usize..=8, 1usize..=4, 1i64..=5, 1i64..=5, 0i64..=3)
        .prop_filter_map("s <= Q", |(n, q, s, k, m, cm, cs, cr)| {
            (s <= q.min(k)).then(|| instance(n, q, s, k, m, cm, cs, cr))
        })
}

struct Envelopes(BTreeMap<usize, (LoadEnvelope, LoadEnvelope)>);

impl Envelopes {
    fn get(&mut self, s: usize, ks: usize) -> Option<&(LoadEnvelope, LoadEnvelope)> {
        if let std::collections::btree_map::Entry::Vacant(e) = self.0.entry(ks) {
            e.insert((l1_envelope(s, ks).ok()?, l2_envelope(s, ks).ok()?));
        }
        self.0.get(&ks)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn optimum_beats_random_search((task, sys) in arb_instance(), seed in any::<u64>()) {
        let Ok(plan) = optimize(&task, &sys, PlanOptions::default()) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut envs = Envelopes(BTreeMap::new());
        let mut feasible = 0;
        for _ in 0..10_000 {
            let ks = rng.gen_range(task.s..=sys.k.min(task.q));
            let kh = rng.gen_range(0..=sys.k - ks);
            let r1 = rng.gen_range(1..=ks);
            let r2 = rng.gen_range(0..=ks);
            let den = rng.gen_range(1..=24usize);
            let alpha = frac(rng.gen_range(0..=den), den);
            let a = Allocation::new(alpha, r1, r2, ks, kh);
            let Some((e1, e2)) = envs.get(task.s, ks) else { continue };
            if let Ok(t) = exec_time_hybrid(&a, &task, &sys, e1, e2) {
                feasible += 1;
                prop_assert!(plan.time.t_total <= t.t_total, "{} beats optimum {}: {}", a, plan.alloc, t.t_total);
            }
        }
        prop_assert!(feasible > 0);
    }

    #[test]
    fn hybrid_dominates_plain_schemes((task, sys) in arb_instance()) {
        prop_assume!(sys.k <= task.q);
        let Ok(plan) = optimize(&task, &sys, PlanOptions::default()) else { return Ok(()) };
        if let Ok(c) = best_cdc(&task, &sys) {
            prop_assert!(plan.time.t_total <= c.time.t_total);
        }
        if let Ok(a) = best_acdc(&task, &sys) {
            prop_assert!(plan.time.t_total <= a.time.t_total);
        }
    }

    #[test]
    fn uniform_cost_scaling((task, sys) in arb_instance(), p in 1i64..=20, q in 1i64..=20) {
        let lambda = Rational::new(p.into(), q.into());
        let Ok(a) = optimize(&task, &sys, PlanOptions::default()) else { return Ok(()) };
        let b = optimize(&task, &sys.scaled(&lambda), PlanOptions::default()).unwrap();
        prop_assert_eq!(&a.alloc, &b.alloc);
        prop_assert_eq!(a.time.scaled(&lambda), b.time);
        prop_assert_eq!(a.raw_time.scaled(&lambda), b.raw_time);
        let ties_a: Vec<_> = a.runner_ups.iter().map(|(x, t)| (x.clone(), t * &lambda)).collect();
        prop_assert_eq!(ties_a, b.runner_ups);
    }

    #[test]
    fn envelopes_are_convex_minorants(s in 1usize..=4, k in 1usize..=12) {
        prop_assume!(s <= k);
        let e1 = l1_envelope(s, k).unwrap();
        let e2 = l2_envelope(s, k).unwrap();
        for (env, raw, lo) in [(&e1, l1 as fn(usize, usize, usize) -> _, if s == 1 { 1 } else { 0 }), (&e2, l2, 0)] {
            for r in lo..=k {
                prop_assert!(env.eval_at(r).unwrap() <= raw(r, s, k).unwrap());
            }
            for &(r, ref v) in env.vertices() {
                prop_assert_eq!(v, &raw(r, s, k).unwrap());
            }
            let v = env.vertices();
            for w in v.windows(3) {
                let slope = |a: &(usize, Rational), b: &(usize, Rational)| (&b.1 - &a.1) / int((b.0 - a.0) as i64);
                prop_assert!(slope(&w[0], &w[1]) < slope(&w[1], &w[2]));
            }
        }
    }
}

fn divisible(
    ks: usize,
    kh: usize,
    s: usize,
    r1: usize,
    r2: usize,
    alpha: Rational,
) -> Option<(Allocation, TaskParams, SystemParams)> {
    let c = binom_usize(ks, s);
    let q = c * s.div_ceil(c);
    for n in 1..=400 {
        let a = Allocation::new(alpha.clone(), r1, r2, ks, kh);
        let task = TaskParams::new(n, q, s, 12).ok()?;
        if divisibility_report(&a, &task).is_empty() {
            let k = ks + kh;
            let sys = SystemParams::new(k, k * n, int(2), int(3), int(1)).ok()?;
            return Some((a, task, sys));
        }
    }
    None
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn simulated_schemes_meet_bounds(
        ks in 2usize..=5, kh in 0usize..=3, s in 1usize..=3, r1 in 1usize..=4, r2 in 0usize..=4,
        num in 0usize..=4, seed in any::<u64>(),
    ) {
        prop_assume!(s <= ks && r1 <= ks && r2 < ks);
        let alpha = if kh == 0 { int(1) } else { frac(num, 4) };
        let Some((alloc, task, sys)) = divisible(ks, kh, s, r1, r2, alpha) else { return Ok(()) };
        let r = run(&alloc, &task, &sys, seed, SimOptions::default()).unwrap();
        prop_assert!(r.matches_prediction());
        prop_assert!(r.decode_ok && r.reduce_ok);
        prop_assert!(r.uncoded_bits >= r.total_bits);
        let coded1 = alloc.alpha > int(0) && r1 >= 2 && r.bits1 > 0;
        let coded2 = alloc.alpha < int(1) && r2 >= 1 && r.bits2 > 0;
        if coded1 || coded2 {
            prop_assert!(r.uncoded_bits > r.total_bits);
        }
        prop_assert_eq!(&r.measured_time.t_reduce, &(&sys.c_r * frac(s * task.q, ks)));

        let l = layout(&alloc, &task, sys.k).unwrap();
        let b = tally_b(&l.placement, &l.assignment);
        prop_assert_eq!(b.alpha(), alloc.alpha.clone());
        if alloc.alpha > int(0) {
            prop_assert_eq!(b.r1(), Some(int(r1 as i64)));
        }
        if alloc.alpha < int(1) {
            prop_assert_eq!(b.r2(), Some(int(r2 as i64)));
        }
        let generic = lemma1_bound(&tally_a(&l.placement, &l.assignment), task.n, task.q);
        let eb = enhanced_lower_bound(&b, s, ks, task.q, task.n).unwrap();
        prop_assert!(generic <= r.measured_load);
        prop_assert!(eb.bound <= r.measured_load);
        prop_assert!(eb.bound <= eb.pre_jensen);
        let lb = phase_lower_bounds(&b, &task, &sys, kh).unwrap();
        prop_assert!(lb.t_map <= r.measured_time.t_map);
        prop_assert!(lb.t_shuffle <= r.measured_time.t_shuffle);
        prop_assert!(lb.t_reduce <= r.measured_time.t_reduce);
    }
}

#[test]
fn hundred_seeds_decode() {
    let (alloc, task, sys) = divisible(4, 2, 2, 2, 1, frac(1, 2)).unwrap();
    for seed in 0..100 {
        let r = run(&alloc, &task, &sys, seed, SimOptions::default()).unwrap();
        assert!(r.decode_ok && r.reduce_ok && r.matches_prediction(), "seed {seed}");
    }
}

#[test]
fn sweep_over_k_is_dominated_by_hybrid() {
    let (task, sys) = instance(20, 20, 1, 2, 2, 2, 1, 0);
    let values: Vec<Rational> = (2..=20).map(int).collect();
    let rows = sweep(&task, &sys, SweepParam::K, &values, PlanOptions::default());
    assert_eq!(rows.len(), 19);
    for row in &rows {
        let h = &row.hybrid.as_ref().unwrap().time.t_total;
        for plain in [&row.cdc, &row.acdc].into_iter().flatten() {
            assert!(h <= &plain.time.t_total, "K = {}", row.value);
        }
    }
}

#[test]
fn sweep_over_m_is_non_increasing() {
    let (task, sys) = instance(6, 6, 1, 5, 1, 1, 2, 1);
    let values: Vec<Rational> = (6..=30).map(int).collect();
    let rows = sweep(&task, &sys, SweepParam::M, &values, PlanOptions::default());
    let times: Vec<Rational> = rows.iter().map(|r| r.hybrid.as_ref().unwrap().time.t_total.clone()).collect();
    assert!(times.windows(2).all(|w| w[1] <= w[0]), "{times:?}");
}

#[test]
fn single_value_sweep_matches_optimize() {
    let (task, sys) = instance(4, 4, 1, 3, 3, 2, 1, 1);
    let rows = sweep(&task, &sys, SweepParam::K, &[int(3)], PlanOptions::default());
    let plan = optimize(&task, &sys, PlanOptions::default()).unwrap();
    let got = rows[0].hybrid.as_ref().unwrap();
    assert_eq!((&got.alloc, &got.time), (&plan.alloc, &plan.time));
}
