//! Closed-form CDC replication under the continuous relaxation, next to the
//! best integer CDC point, across cost ratios.
//!
//! ```not_rust
//! cargo run --example analytic_cdc
//! ```

use hybrid_cdc::math::{fmt_exact, frac, int};
use hybrid_cdc::planner::{analytic_cdc_allocation, best_cdc};
use hybrid_cdc::{SystemParams, TaskParams};

fn main() -> hybrid_cdc::Result<()> {
    let task = TaskParams::new(10, 12, 1, 8)?;
    for (num, den) in [(1, 20), (1, 4), (1, 1), (4, 1), (16, 1), (50, 1)] {
        let system = SystemParams::new(8, 30, int(1), frac(num, den), int(0))?;
        let a = analytic_cdc_allocation(&task, &system)?;
        let best = best_cdc(&task, &system)?;
        println!(
            "c_s/c_m = {num}/{den}: {:?} r1 = {:.4}, Ks = {}  | integer best r1 = {}, Kc = {}, T = {}",
            a.case,
            a.r1,
            a.ks,
            best.r,
            best.ks,
            fmt_exact(&best.time.t_total)
        );
    }
    Ok(())
}
