use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bounds::{enhanced_lower_bound, lemma1_bound, phase_lower_bounds, tally_a, tally_b};
use crate::error::{Error, Result};
use crate::loads::TimeBreakdown;
use crate::math::{fmt_both, fmt_decimal, fmt_exact, Rational};
use crate::model::{Allocation, Placement, ReduceAssignment, SystemParams};
use crate::planner::{
    acdc_candidates, cdc_candidates, optimize, sweep as sweep_rows, Plan, PlanOptions, PureCandidate,
};
use crate::simulator::{layout, run as run_sim, SimOptions, SimReport};

use super::config::Config;
use super::verify::run_suites;
use super::{AllocArgs, BoundArgs, PlanArgs, Pure, SimulateArgs, SweepArgs, VerifyArgs, EXIT_OK, EXIT_VERIFY};

/// `T_total` in the cost units, e.g. `4/3*c_s + 4/3*c_r`: map and shuffle
/// time in units of `c_s`, reduce time in units of `c_r`.
fn in_cost_units(t: &TimeBreakdown, system: &SystemParams) -> String {
    let cs = (&t.t_map + &t.t_shuffle) / &system.c_s;
    if system.c_r.is_zero() {
        format!("{}*c_s", fmt_exact(&cs))
    } else {
        format!("{}*c_s + {}*c_r", fmt_exact(&cs), fmt_exact(&(&t.t_reduce / &system.c_r)))
    }
}

fn write_times(out: &mut dyn Write, label: &str, t: &TimeBreakdown, system: &SystemParams) -> Result<()> {
    writeln!(out, "{label}")?;
    writeln!(out, "  T_map     = {}", fmt_both(&t.t_map))?;
    writeln!(out, "  T_shuffle = {}", fmt_both(&t.t_shuffle))?;
    writeln!(out, "  T_reduce  = {}", fmt_both(&t.t_reduce))?;
    writeln!(out, "  T_total   = {}", fmt_both(&t.t_total))?;
    writeln!(out, "            = {}", in_cost_units(t, system))?;
    Ok(())
}

#[derive(Serialize)]
struct JsonTimes {
    t_map: String,
    t_shuffle: String,
    t_reduce: String,
    t_total: String,
    t_total_decimal: String,
}

impl From<&TimeBreakdown> for JsonTimes {
    fn from(t: &TimeBreakdown) -> Self {
        Self {
            t_map: fmt_exact(&t.t_map),
            t_shuffle: fmt_exact(&t.t_shuffle),
            t_reduce: fmt_exact(&t.t_reduce),
            t_total: fmt_exact(&t.t_total),
            t_total_decimal: fmt_decimal(&t.t_total),
        }
    }
}

#[derive(Serialize)]
struct JsonAlloc {
    alpha: String,
    r1: usize,
    r2: usize,
    ks: usize,
    kh: usize,
}

impl From<&Allocation> for JsonAlloc {
    fn from(a: &Allocation) -> Self {
        Self { alpha: fmt_exact(&a.alpha), r1: a.r1, r2: a.r2, ks: a.ks, kh: a.kh }
    }
}

#[derive(Serialize)]
struct JsonPlan {
    alloc: JsonAlloc,
    time: JsonTimes,
    raw_time: JsonTimes,
    simulatable: bool,
}

#[derive(Serialize)]
struct JsonCandidate {
    ks: usize,
    kh: usize,
    r: usize,
    time: JsonTimes,
}

fn write_candidates(
    out: &mut dyn Write,
    pure: Pure,
    cands: &[PureCandidate],
    system: &SystemParams,
    json: bool,
) -> Result<()> {
    let best = cands
        .iter()
        .min_by(|a, b| (&a.time.t_total, a.ks, a.kh, a.r).cmp(&(&b.time.t_total, b.ks, b.kh, b.r)))
        .ok_or_else(|| Error::Infeasible(format!("no feasible {pure:?} configuration")))?;
    if json {
        let list: Vec<JsonCandidate> =
            cands.iter().map(|c| JsonCandidate { ks: c.ks, kh: c.kh, r: c.r, time: (&c.time).into() }).collect();
        serde_json::to_writer_pretty(&mut *out, &list)?;
        writeln!(out)?;
        return Ok(());
    }
    match pure {
        Pure::Cdc => writeln!(out, "plain CDC candidates ({}):", cands.len())?,
        Pure::Acdc => writeln!(out, "plain ACDC candidates ({}):", cands.len())?,
    }
    let head = match pure {
        Pure::Cdc => "  Kc  r1",
        Pure::Acdc => "  Ks  Kh  r2",
    };
    writeln!(out, "{head}  {:>10}  {:>10}  {:>10}  {:>10}", "T_map", "T_shuffle", "T_reduce", "T_total")?;
    for c in cands {
        let id = match pure {
            Pure::Cdc => format!("  {:>2}  {:>2}", c.ks, c.r),
            Pure::Acdc => format!("  {:>2}  {:>2}  {:>2}", c.ks, c.kh, c.r),
        };
        writeln!(
            out,
            "{id}  {:>10}  {:>10}  {:>10}  {:>10}",
            fmt_exact(&c.time.t_map),
            fmt_exact(&c.time.t_shuffle),
            fmt_exact(&c.time.t_reduce),
            fmt_exact(&c.time.t_total)
        )?;
    }
    let label = match pure {
        Pure::Cdc => format!("best: Kc={} r1={}", best.ks, best.r),
        Pure::Acdc => format!("best: Ks={} Kh={} r2={}", best.ks, best.kh, best.r),
    };
    write_times(out, &label, &best.time, system)
}

pub(super) fn plan(a: PlanArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = Config::load(&a.config.config)?;
    cfg.system.check_storage(&cfg.task)?;
    if let Some(pure) = a.pure {
        let cands = match pure {
            Pure::Cdc => cdc_candidates(&cfg.task, &cfg.system),
            Pure::Acdc => acdc_candidates(&cfg.task, &cfg.system),
        };
        write_candidates(out, pure, &cands, &cfg.system, a.json)?;
        return Ok(EXIT_OK);
    }
    let options = PlanOptions { require_simulatable: a.simulatable || cfg.require_simulatable };
    let plan = optimize(&cfg.task, &cfg.system, options)?;
    if a.json {
        let j = JsonPlan {
            alloc: (&plan.alloc).into(),
            time: (&plan.time).into(),
            raw_time: (&plan.raw_time).into(),
            simulatable: plan.simulatable,
        };
        serde_json::to_writer_pretty(&mut *out, &j)?;
        writeln!(out)?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "allocation: {}", plan.alloc)?;
    write_times(out, "time:", &plan.time, &cfg.system)?;
    if plan.raw_time != plan.time {
        writeln!(out, "at raw (non-envelope) loads: T_total = {}", fmt_both(&plan.raw_time.t_total))?;
    }
    writeln!(out, "simulatable: {}", plan.simulatable)?;
    if !plan.runner_ups.is_empty() {
        writeln!(out, "runner-ups:")?;
        for (alloc, t) in &plan.runner_ups {
            writeln!(out, "  {alloc}  T_total = {}", fmt_both(t))?;
        }
    }
    Ok(EXIT_OK)
}

fn resolve_alloc(cfg: &Config, over: &AllocArgs) -> Result<Allocation> {
    let complete =
        over.alpha.is_some() && over.r1.is_some() && over.r2.is_some() && over.ks.is_some() && over.kh.is_some();
    let base: Option<Plan> = if complete {
        None
    } else {
        match optimize(&cfg.task, &cfg.system, PlanOptions { require_simulatable: true }) {
            Ok(p) => Some(p),
            Err(e) if over.any() => {
                return Err(Error::Infeasible(format!(
                    "{e}; pass all of --alpha --r1 --r2 --ks --kh to choose an allocation explicitly"
                )))
            }
            Err(e) => return Err(e),
        }
    };
    let b = base.map(|p| p.alloc);
    let pick = |o: Option<usize>, f: fn(&Allocation) -> usize| o.or(b.as_ref().map(f)).expect("complete or base");
    Ok(Allocation::new(
        over.alpha.clone().or(b.as_ref().map(|a| a.alpha.clone())).expect("complete or base"),
        pick(over.r1, |a| a.r1),
        pick(over.r2, |a| a.r2),
        pick(over.ks, |a| a.ks),
        pick(over.kh, |a| a.kh),
    ))
}

fn opt_load(r: &Option<Rational>) -> String {
    r.as_ref().map_or_else(|| "-".into(), fmt_both)
}

fn write_report(out: &mut dyn Write, r: &SimReport, system: &SystemParams) -> Result<()> {
    writeln!(out, "allocation: {}", r.alloc)?;
    writeln!(out, "seed: {}", r.seed)?;
    writeln!(out, "files: N1={} N2={}", r.n1, r.n2)?;
    writeln!(
        out,
        "shuffled bits: subsystem1={} subsystem2={} total={} (field padding {}, uncoded baseline {})",
        r.bits1, r.bits2, r.total_bits, r.padding_bits, r.uncoded_bits
    )?;
    writeln!(out, "load subsystem 1: {}", opt_load(&r.measured_load1))?;
    writeln!(out, "load subsystem 2: {}", opt_load(&r.measured_load2))?;
    writeln!(out, "load measured:  {}", fmt_both(&r.measured_load))?;
    writeln!(out, "load predicted: {}", fmt_both(&r.predicted_load))?;
    write_times(out, "measured time:", &r.measured_time, system)?;
    write_times(out, "predicted time:", &r.predicted_time, system)?;
    writeln!(out, "decode: {} ({} batch decodes)", if r.decode_ok { "ok" } else { "FAILED" }, r.delivery.decoded)?;
    writeln!(
        out,
        "reduce: {} ({} functions, replica digests agree)",
        if r.reduce_ok { "ok" } else { "FAILED" },
        r.digests.len()
    )?;
    writeln!(out, "measured == predicted: {}", r.matches_prediction())?;
    Ok(())
}

#[derive(Serialize)]
struct JsonReport {
    alloc: JsonAlloc,
    seed: u64,
    n1: usize,
    n2: usize,
    bits1: usize,
    bits2: usize,
    total_bits: usize,
    padding_bits: usize,
    uncoded_bits: usize,
    measured_load: String,
    predicted_load: String,
    measured_time: JsonTimes,
    predicted_time: JsonTimes,
    matches_prediction: bool,
}

fn export_transcript(r: &SimReport, path: &Path, w: u32, hex: bool) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::Parse(format!("cannot create {}: {e}", path.display())))?;
    let mut f = BufWriter::new(f);
    r.transcript.write_json_lines(&mut f, w, hex)?;
    f.flush()?;
    Ok(())
}

pub(super) fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = Config::load(&a.config.config)?;
    cfg.system.check_storage(&cfg.task)?;
    let seed = cfg.seed(a.seed)?;
    let alloc = resolve_alloc(&cfg, &a.alloc)?;
    let report = run_sim(&alloc, &cfg.task, &cfg.system, seed, SimOptions { w: cfg.w, fault: a.inject_fault })?;
    if let Some(path) = &a.export_transcript {
        export_transcript(&report, path, cfg.w, a.hex)?;
    }
    if a.json {
        let j = JsonReport {
            alloc: (&report.alloc).into(),
            seed,
            n1: report.n1,
            n2: report.n2,
            bits1: report.bits1,
            bits2: report.bits2,
            total_bits: report.total_bits,
            padding_bits: report.padding_bits,
            uncoded_bits: report.uncoded_bits,
            measured_load: fmt_exact(&report.measured_load),
            predicted_load: fmt_exact(&report.predicted_load),
            measured_time: (&report.measured_time).into(),
            predicted_time: (&report.predicted_time).into(),
            matches_prediction: report.matches_prediction(),
        };
        serde_json::to_writer_pretty(&mut *out, &j)?;
        writeln!(out)?;
    } else {
        write_report(out, &report, &cfg.system)?;
    }
    Ok(if report.matches_prediction() { EXIT_OK } else { EXIT_VERIFY })
}

fn sweep_values(from: &Rational, to: &Rational, step: &Rational) -> Result<Vec<Rational>> {
    if !step.is_positive() {
        return Err(Error::Parse("--step must be positive".into()));
    }
    let mut values = Vec::new();
    let mut v = from.clone();
    while v <= *to {
        values.push(v.clone());
        v += step;
    }
    Ok(values)
}

pub(super) fn sweep(a: SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = Config::load(&a.config.config)?;
    let values = sweep_values(&a.from, &a.to, &a.step)?;
    let options = PlanOptions { require_simulatable: a.simulatable || cfg.require_simulatable };
    let rows = sweep_rows(&cfg.task, &cfg.system, a.vary, &values, options);
    let sink: Box<dyn Write + '_> = match &a.out {
        Some(p) => Box::new(File::create(p).map_err(|e| Error::Parse(format!("cannot create {}: {e}", p.display())))?),
        None => Box::new(&mut *out),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        a.vary.name(),
        "t_cdc_best",
        "t_acdc_best",
        "t_hybrid",
        "t_cdc_best_exact",
        "t_acdc_best_exact",
        "t_hybrid_exact",
        "alpha",
        "r1",
        "r2",
        "Ks",
        "Kh",
        "status",
    ])
    .map_err(csv_err)?;
    for row in rows {
        let dec = |t: Option<&Rational>| t.map_or_else(String::new, fmt_decimal);
        let exact = |t: Option<&Rational>| t.map_or_else(String::new, fmt_exact);
        let cdc = row.cdc.as_ref().map(|c| &c.time.t_total);
        let acdc = row.acdc.as_ref().map(|c| &c.time.t_total);
        let hyb = row.hybrid.as_ref().map(|p| &p.time.t_total);
        let alloc = row.hybrid.as_ref().map(|p| &p.alloc);
        let field = |f: fn(&Allocation) -> String| alloc.map_or_else(String::new, f);
        w.write_record([
            fmt_exact(&row.value),
            dec(cdc),
            dec(acdc),
            dec(hyb),
            exact(cdc),
            exact(acdc),
            exact(hyb),
            field(|a| fmt_exact(&a.alpha)),
            field(|a| a.r1.to_string()),
            field(|a| a.r2.to_string()),
            field(|a| a.ks.to_string()),
            field(|a| a.kh.to_string()),
            row.error.as_deref().map_or_else(|| "ok".to_string(), |e| format!("infeasible: {e}")),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Explicit placement and reduce sets, node `k` at index `k - 1`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacementFile {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "Q")]
    q: usize,
    placement: Vec<BTreeSet<usize>>,
    reduce: Vec<BTreeSet<usize>>,
}

fn load_placement(path: &Path) -> Result<(Placement, ReduceAssignment)> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let f: PlacementFile = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("placement file: {e}")))?;
    if f.reduce.len() > f.placement.len() {
        return Err(Error::Parse("reduce lists more nodes than placement".into()));
    }
    let mut reduce = f.reduce;
    reduce.resize(f.placement.len(), BTreeSet::new());
    let p = Placement::from_node_sets(f.n, f.placement).map_err(|e| Error::Parse(format!("placement file: {e}")))?;
    let w = ReduceAssignment::from_node_sets(f.q, reduce).map_err(|e| Error::Parse(format!("placement file: {e}")))?;
    Ok((p, w))
}

pub(super) fn bound(a: BoundArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = Config::load(&a.config.config)?;
    let (placement, assignment, alloc) = match &a.placement {
        Some(path) => {
            let (p, w) = load_placement(path)?;
            (p, w, None)
        }
        None => {
            cfg.system.check_storage(&cfg.task)?;
            let alloc = resolve_alloc(&cfg, &a.alloc)?;
            alloc.validate(&cfg.task, &cfg.system)?;
            let l = layout(&alloc, &cfg.task, cfg.system.k)?;
            (l.placement, l.assignment, Some(alloc))
        }
    };
    let (n, q) = (placement.n, assignment.q);
    if let Some(alloc) = &alloc {
        writeln!(out, "scheme placement: {alloc}")?;
    }
    let generic = lemma1_bound(&tally_a(&placement, &assignment), n, q);
    let b = tally_b(&placement, &assignment);
    writeln!(out, "nodes: K={} solvers={:?} non-solvers={:?}", placement.node_count(), b.solvers, b.helpers)?;
    writeln!(out, "generic counting bound: {}", fmt_both(&generic))?;
    writeln!(out, "multiplicities: b1={:?} b2={:?}", b.b1, b.b2)?;
    let show = |r: &Option<Rational>| r.as_ref().map_or_else(|| "undefined".to_string(), fmt_exact);
    writeln!(out, "derived: alpha={} r1={} r2={}", fmt_exact(&b.alpha()), show(&b.r1()), show(&b.r2()))?;
    let enhanced =
        assignment.check_weakly_symmetric().and_then(|_| enhanced_lower_bound(&b, assignment.s, b.ks(), q, n));
    match &enhanced {
        Ok(eb) => {
            writeln!(out, "enhanced bound: {}", fmt_both(&eb.bound))?;
            writeln!(out, "enhanced bound before averaging: {}", fmt_both(&eb.pre_jensen))?;
        }
        Err(e) => writeln!(out, "enhanced bound: n/a ({e})")?,
    }
    if a.simulate {
        let alloc = alloc.expect("--simulate conflicts with --placement");
        let seed = cfg.seed(a.seed)?;
        let r = run_sim(&alloc, &cfg.task, &cfg.system, seed, SimOptions { w: cfg.w, fault: None })?;
        writeln!(out, "measured load: {}", fmt_both(&r.measured_load))?;
        writeln!(out, "gap to generic bound: {}", fmt_both(&(&r.measured_load - &generic)))?;
        if let Ok(eb) = &enhanced {
            writeln!(out, "gap to enhanced bound: {}", fmt_both(&(&r.measured_load - &eb.bound)))?;
            let lb = phase_lower_bounds(&b, &cfg.task, &cfg.system, alloc.kh)?;
            write_times(out, "phase lower bounds:", &lb, &cfg.system)?;
            writeln!(out, "gap in total time: {}", fmt_both(&(&r.measured_time.t_total - &lb.t_total)))?;
        }
        if r.measured_load < generic || enhanced.as_ref().is_ok_and(|eb| r.measured_load < eb.bound) {
            writeln!(out, "measured load is below a converse bound")?;
            return Ok(EXIT_VERIFY);
        }
    }
    Ok(EXIT_OK)
}

pub(super) fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = a.config.as_deref().map(Config::load).transpose()?;
    let seed = match &cfg {
        Some(c) => c.seed(a.seed)?,
        None => a.seed.unwrap_or(0),
    };
    let results = run_suites(a.suite, seed, cfg.as_ref(), a.perturb);
    let mut failed = false;
    for r in &results {
        if r.failures.is_empty() {
            writeln!(out, "suite {}: PASS ({} checks)", r.name, r.checks)?;
        } else {
            failed = true;
            writeln!(out, "suite {}: FAIL ({} of {} checks failed)", r.name, r.failures.len(), r.checks)?;
            for f in r.failures.iter().take(5) {
                writeln!(out, "  {f}")?;
            }
        }
    }
    Ok(if failed { EXIT_VERIFY } else { EXIT_OK })
}
