//! Sweep the node count with reduce time neglected and print CSV: best CDC,
//! best ACDC and hybrid per K. Plot the last three columns against K.
//!
//! ```not_rust
//! cargo run --example sweep_csv > sweep.csv
//! ```

use hybrid_cdc::math::{fmt_decimal, int};
use hybrid_cdc::planner::{sweep, PlanOptions, SweepParam};
use hybrid_cdc::{SystemParams, TaskParams};

fn main() -> hybrid_cdc::Result<()> {
    let task = TaskParams::new(12, 12, 1, 8)?;
    let system = SystemParams::new(2, 24, int(3), int(2), int(0))?;
    let values: Vec<_> = (2..=12).map(int).collect();
    println!("K,t_cdc,t_acdc,t_hybrid");
    for row in sweep(&task, &system, SweepParam::K, &values, PlanOptions::default()) {
        let cell = |t: Option<&hybrid_cdc::Rational>| t.map(fmt_decimal).unwrap_or_default();
        println!(
            "{},{},{},{}",
            row.value,
            cell(row.cdc.as_ref().map(|c| &c.time.t_total)),
            cell(row.acdc.as_ref().map(|c| &c.time.t_total)),
            cell(row.hybrid.as_ref().map(|p| &p.time.t_total)),
        );
    }
    Ok(())
}
