//! Built-in consistency suites: each closed form is compared with an
//! independent computation (direct counting, a bit-exact run, brute force).

use std::collections::BTreeMap;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{a_from_b, enhanced_lower_bound, lemma1_bound, tally_a, tally_b, tally_enhanced};
use crate::codec::{decode_vandermonde, encode_vandermonde, Field, SymbolVector};
use crate::loads::{exec_time_hybrid, l1, l1_envelope, l2, l2_envelope};
use crate::math::{frac, int, Rational};
use crate::model::{Allocation, SystemParams, TaskParams};
use crate::planner::{best_acdc, best_cdc, optimize, PlanOptions};
use crate::simulator::{layout, run, SimOptions};

use super::config::Config;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Loads,
    Codec,
    Bounds,
    Simulator,
    Planner,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
}

struct Checker {
    checks: usize,
    failures: Vec<String>,
    perturb: bool,
}

impl Checker {
    fn new(perturb: bool) -> Self {
        Self { checks: 0, failures: Vec::new(), perturb }
    }

    /// A closed-form value, nudged by one part in 997 under `--perturb`.
    fn closed(&self, x: Rational) -> Rational {
        if self.perturb {
            x * frac(998, 997)
        } else {
            x
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn fail(&mut self, what: String) {
        self.checks += 1;
        self.failures.push(what);
    }

    fn finish(self, name: &'static str) -> SuiteResult {
        SuiteResult { name, checks: self.checks, failures: self.failures }
    }
}

fn instances(config: Option<&Config>) -> Vec<(TaskParams, SystemParams)> {
    let mk = |n, q, s, v, k, m, cm: i64, cs: i64, cr: i64| {
        (
            TaskParams::new(n, q, s, v).expect("built-in task"),
            SystemParams::new(k, m, int(cm), int(cs), int(cr)).expect("built-in system"),
        )
    };
    let mut list = vec![
        mk(12, 6, 1, 8, 3, 24, 2, 1, 1),
        mk(12, 12, 1, 16, 4, 30, 1, 2, 0),
        mk(12, 12, 2, 24, 4, 36, 1, 1, 1),
        mk(24, 12, 1, 48, 5, 60, 3, 1, 0),
    ];
    if let Some(c) = config {
        list.push((c.task.clone(), c.system.clone()));
    }
    list
}

fn loads_suite(perturb: bool) -> SuiteResult {
    let mut c = Checker::new(perturb);
    for k in 2..=9usize {
        for r in 1..k {
            // s = 1: each of the K - r absent nodes receives one value per
            // missing file, coded r at a time (solvers) or r + 1 at a time
            // (with a helper).
            let want1 = frac(k - r, r * k);
            let want2 = frac(k - r, (r + 1) * k);
            match l1(r, 1, k) {
                Ok(v) => c.check(c.closed(v.clone()) == want1, || format!("l1({r},1,{k}) = {v}, expected {want1}")),
                Err(e) => c.fail(format!("l1({r},1,{k}): {e}")),
            }
            match l2(r, 1, k) {
                Ok(v) => c.check(c.closed(v.clone()) == want2, || format!("l2({r},1,{k}) = {v}, expected {want2}")),
                Err(e) => c.fail(format!("l2({r},1,{k}): {e}")),
            }
        }
        for s in 1..=k {
            for r in 1..=k {
                let full = l1(r, s, k).ok();
                if r == k {
                    c.check(full.as_ref().is_some_and(|v| c.closed(v.clone()) == int(0)), || {
                        format!("l1({k},{s},{k}) should vanish")
                    });
                }
            }
            if let (Ok(e1), Ok(e2)) = (l1_envelope(s, k), l2_envelope(s, k)) {
                for &(r, ref v) in e1.vertices() {
                    let raw = l1(r, s, k).unwrap_or_else(|_| int(-1));
                    c.check(*v == c.closed(raw.clone()), || {
                        format!("l1 envelope vertex {r} for s={s}, K={k}: {v} vs {raw}")
                    });
                }
                for &(r, ref v) in e2.vertices() {
                    let raw = l2(r, s, k).unwrap_or_else(|_| int(-1));
                    c.check(*v == c.closed(raw.clone()), || {
                        format!("l2 envelope vertex {r} for s={s}, K={k}: {v} vs {raw}")
                    });
                }
            }
        }
    }
    c.finish("loads")
}

fn codec_suite(seed: u64, perturb: bool) -> SuiteResult {
    let mut c = Checker::new(perturb);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for w in [8u32, 16] {
        let field = Field::new(w).expect("supported width");
        for n1 in 1..=6usize {
            for n2 in 1..=n1 {
                let bit_len = rng.gen_range(1..=64usize);
                let symbols: Vec<SymbolVector> = (0..n1)
                    .map(|_| {
                        let bits: crate::codec::Bits = (0..bit_len).map(|_| rng.gen::<bool>()).collect();
                        SymbolVector::from_bits(&bits, w)
                    })
                    .collect();
                let alphas = field.alphas(n1).expect("n1 below field size");
                let mut coded = match encode_vandermonde(&field, &symbols, n2, &alphas) {
                    Ok(x) => x,
                    Err(e) => {
                        c.fail(format!("encode w={w} n1={n1} n2={n2}: {e}"));
                        continue;
                    }
                };
                if perturb {
                    coded[0].elems[0] ^= 1;
                }
                let known: BTreeMap<usize, SymbolVector> = (n2..n1).map(|j| (j, symbols[j].clone())).collect();
                match decode_vandermonde(&field, &coded, &alphas, &known) {
                    Ok(got) => c.check(got == symbols, || format!("round trip w={w} n1={n1} n2={n2} differs")),
                    Err(e) => c.fail(format!("decode w={w} n1={n1} n2={n2}: {e}")),
                }
            }
        }
    }
    c.finish("codec")
}

fn small_allocs(task: &TaskParams, system: &SystemParams) -> Vec<Allocation> {
    let mut out = Vec::new();
    for ks in task.s.max(1)..=system.k.min(task.q) {
        for kh in 0..=system.k - ks {
            for r1 in 1..=ks {
                for r2 in 0..ks {
                    for i in 0..=task.n {
                        let a = Allocation::new(frac(i, task.n), r1, r2, ks, kh);
                        if crate::model::divisibility_report(&a, task).is_empty() && a.validate(task, system).is_ok() {
                            out.push(a);
                        }
                    }
                }
            }
        }
    }
    out
}

fn bounds_suite(config: Option<&Config>, perturb: bool) -> SuiteResult {
    let mut c = Checker::new(perturb);
    for (task, system) in instances(config) {
        for alloc in small_allocs(&task, &system).into_iter().take(40) {
            let Ok(l) = layout(&alloc, &task, system.k) else { continue };
            let b = tally_b(&l.placement, &l.assignment);
            let (e1, e2) = tally_enhanced(&l.placement, &l.assignment);
            match a_from_b(&b, task.s, alloc.ks, task.q) {
                Ok((a1, a2)) => {
                    c.check(a1 == e1 && a2 == e2, || format!("a tables from b differ from direct tally at {alloc}"))
                }
                Err(e) => c.fail(format!("a_from_b at {alloc}: {e}")),
            }
            let generic = lemma1_bound(&tally_a(&l.placement, &l.assignment), task.n, task.q);
            let Ok(raw) = crate::loads::exec_time_hybrid_raw(&alloc, &task, &system) else { continue };
            let raw_load = &raw.t_shuffle / &system.c_s;
            c.check(generic <= c.closed(raw_load.clone()), || {
                format!("generic bound {generic} above scheme load {raw_load} at {alloc}")
            });
            match enhanced_lower_bound(&b, task.s, alloc.ks, task.q, task.n) {
                Ok(eb) => {
                    let closed = c.closed(raw_load.clone());
                    c.check(eb.bound <= closed, || {
                        format!("enhanced bound {} above scheme load {raw_load} at {alloc}", eb.bound)
                    });
                    c.check(eb.bound <= eb.pre_jensen, || {
                        format!("averaged bound exceeds pre-averaging sum at {alloc}")
                    });
                    if let (Ok(env1), Ok(env2)) = (l1_envelope(task.s, alloc.ks), l2_envelope(task.s, alloc.ks)) {
                        let arm = |share: Rational, env: &crate::loads::LoadEnvelope, r: usize| -> Rational {
                            if share == int(0) {
                                int(0)
                            } else {
                                share * env.eval_at(r).unwrap_or_else(|_| int(-1))
                            }
                        };
                        let n1 = frac(l.placement.n1, task.n);
                        let want = c.closed(arm(n1.clone(), &env1, alloc.r1) + arm(int(1) - n1, &env2, alloc.r2));
                        c.check(eb.bound == want, || {
                            format!("enhanced bound {} vs closed form {want} at {alloc}", eb.bound)
                        });
                    }
                }
                Err(e) => c.fail(format!("enhanced bound at {alloc}: {e}")),
            }
        }
    }
    c.finish("bounds")
}

fn simulator_suite(seed: u64, config: Option<&Config>, perturb: bool) -> SuiteResult {
    let mut c = Checker::new(perturb);
    let w = config.map_or(16, |c| c.w);
    for (task, system) in instances(config) {
        let Ok(plan) = optimize(&task, &system, PlanOptions { require_simulatable: true }) else { continue };
        let mut allocs = vec![plan.alloc];
        allocs.extend(plan.runner_ups.into_iter().map(|(a, _)| a).take(2));
        for alloc in allocs {
            match run(&alloc, &task, &system, seed, SimOptions { w, fault: None }) {
                Ok(r) => {
                    let predicted = c.closed(r.predicted_load.clone());
                    c.check(r.measured_load == predicted, || {
                        format!("measured load {} vs predicted {predicted} at {alloc}", r.measured_load)
                    });
                    c.check(r.decode_ok && r.reduce_ok, || format!("decode or reduce failed at {alloc}"));
                }
                Err(e) => c.fail(format!("simulate {alloc}: {e}")),
            }
        }
    }
    c.finish("simulator")
}

fn planner_suite(config: Option<&Config>, perturb: bool) -> SuiteResult {
    let mut c = Checker::new(perturb);
    for (task, system) in instances(config) {
        let plan = match optimize(&task, &system, PlanOptions::default()) {
            Ok(p) => p,
            Err(e) => {
                c.fail(format!("optimize: {e}"));
                continue;
            }
        };
        let best = c.closed(plan.time.t_total.clone());
        for ks in task.s.max(1)..=system.k.min(task.q) {
            let (Ok(env1), Ok(env2)) = (l1_envelope(task.s, ks), l2_envelope(task.s, ks)) else { continue };
            for kh in 0..=system.k - ks {
                for r1 in 1..=ks {
                    for r2 in 0..=ks {
                        for i in 0..=task.n {
                            let a = Allocation::new(frac(i, task.n), r1, r2, ks, kh);
                            if let Ok(t) = exec_time_hybrid(&a, &task, &system, &env1, &env2) {
                                c.check(best <= t.t_total, || format!("{a} beats the optimum: {} < {best}", t.t_total));
                            }
                        }
                    }
                }
            }
        }
        if system.k <= task.q {
            for pure in [best_cdc(&task, &system), best_acdc(&task, &system)].into_iter().flatten() {
                c.check(best <= pure.time.t_total, || {
                    format!("plain scheme {} beats hybrid {best}", pure.time.t_total)
                });
            }
        }
    }
    c.finish("planner")
}

/// Runs the selected suites; the `config` instance, if given, is added to the
/// built-in ones.
pub fn run_suites(suite: Suite, seed: u64, config: Option<&Config>, perturb: bool) -> Vec<SuiteResult> {
    let all = suite == Suite::All;
    let mut out = Vec::new();
    if all || suite == Suite::Loads {
        out.push(loads_suite(perturb));
    }
    if all || suite == Suite::Codec {
        out.push(codec_suite(seed, perturb));
    }
    if all || suite == Suite::Bounds {
        out.push(bounds_suite(config, perturb));
    }
    if all || suite == Suite::Simulator {
        out.push(simulator_suite(seed, config, perturb));
    }
    if all || suite == Suite::Planner {
        out.push(planner_suite(config, perturb));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_and_perturbation_fails() {
        for s in [Suite::Loads, Suite::Codec, Suite::Bounds, Suite::Simulator, Suite::Planner] {
            let ok = run_suites(s, 1, None, false);
            assert!(ok.iter().all(|r| r.failures.is_empty() && r.checks > 0), "{ok:?}");
            let bad = run_suites(s, 1, None, true);
            assert!(bad.iter().all(|r| !r.failures.is_empty()), "{s:?} ignores perturbation");
        }
    }
}
