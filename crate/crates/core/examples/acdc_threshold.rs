//! Resource levels beyond which plain ACDC is already optimal (s = 1, no
//! reduce cost), checked against the hybrid planner.
//!
//! ```not_rust
//! cargo run --example acdc_threshold
//! ```

use hybrid_cdc::loads::{acdc_sufficiency_threshold, exec_time_acdc};
use hybrid_cdc::math::{fmt_exact, frac, int};
use hybrid_cdc::planner::{optimize, PlanOptions};
use hybrid_cdc::{SystemParams, TaskParams};

fn main() -> hybrid_cdc::Result<()> {
    let task = TaskParams::new(6, 6, 1, 8)?;
    for i in [1, 3, 6, 10] {
        let c_s = frac(i, 2);
        let th = acdc_sufficiency_threshold(&task, &SystemParams::new(7, 6, int(1), c_s.clone(), int(0))?)?;
        let Some(k) = th.k_prime else { continue };
        let system = SystemParams::new(k, th.m_prime, int(1), c_s.clone(), int(0))?;
        let acdc = exec_time_acdc(th.r2, task.q, k - task.q, &task, &system)?;
        let plan = optimize(&task, &system, PlanOptions::default())?;
        println!(
            "c_s = {}: r2' = {}, K' = {k}, M' = {}  ACDC {}  hybrid {}",
            fmt_exact(&c_s),
            th.r2,
            th.m_prime,
            fmt_exact(&acdc.t_total),
            fmt_exact(&plan.time.t_total)
        );
    }
    Ok(())
}
