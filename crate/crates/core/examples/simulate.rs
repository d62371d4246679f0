//! Bit-exact run of a hybrid allocation with cascaded reduce (s = 2): map,
//! coded shuffle in both subsystems, decoding and replicated reduce.
//!
//! ```not_rust
//! cargo run --example simulate
//! ```

use hybrid_cdc::math::{fmt_exact, frac, int};
use hybrid_cdc::simulator::{run, SimOptions, Subsystem};
use hybrid_cdc::{Allocation, SystemParams, TaskParams};

fn main() -> hybrid_cdc::Result<()> {
    let task = TaskParams::new(48, 6, 2, 12)?;
    let system = SystemParams::new(6, 144, int(1), frac(3, 2), frac(1, 4))?;
    let alloc = Allocation::new(frac(1, 2), 2, 1, 4, 2);
    let report = run(&alloc, &task, &system, 7, SimOptions::default())?;

    println!("{alloc}: N1 = {}, N2 = {}", report.n1, report.n2);
    println!("multicasts: {}", report.transcript.len());
    println!("bits: {} + {} = {} (uncoded {})", report.bits1, report.bits2, report.total_bits, report.uncoded_bits);
    println!("load measured {} / predicted {}", fmt_exact(&report.measured_load), fmt_exact(&report.predicted_load));
    println!(
        "time measured {} / predicted {}",
        fmt_exact(&report.measured_time.t_total),
        fmt_exact(&report.predicted_time.t_total)
    );
    for rec in report.transcript.records.iter().filter(|r| r.subsystem == Subsystem::Helper).take(3) {
        println!("  node {} -> {:?}: {} bits", rec.sender, rec.recipients, rec.bits);
    }
    assert!(report.matches_prediction());
    Ok(())
}
