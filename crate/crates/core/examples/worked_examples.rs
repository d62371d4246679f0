//! The two small worked instances: N = Q = 4, M = 12, c_m = 2 c_s, with
//! K = 3 (CDC wins) and K = 6 (ACDC wins), plus the hybrid optimum for each.
//!
//! ```not_rust
//! cargo run --example worked_examples
//! ```

use hybrid_cdc::math::{fmt_exact, int};
use hybrid_cdc::planner::{acdc_candidates, cdc_candidates, optimize, PlanOptions};
use hybrid_cdc::{SystemParams, TaskParams};

fn main() -> hybrid_cdc::Result<()> {
    let task = TaskParams::new(4, 4, 1, 8)?;
    for (k, c_r) in [(3, 1), (6, 0)] {
        let system = SystemParams::new(k, 12, int(2), int(1), int(c_r))?;
        println!("K = {k}, c_r = {c_r}");
        for c in cdc_candidates(&task, &system) {
            println!("  CDC  Kc={} r1={}          T = {}", c.ks, c.r, fmt_exact(&c.time.t_total));
        }
        for c in acdc_candidates(&task, &system) {
            println!("  ACDC Ks={} Kh={} r2={}    T = {}", c.ks, c.kh, c.r, fmt_exact(&c.time.t_total));
        }
        let plan = optimize(&task, &system, PlanOptions::default())?;
        println!("  hybrid {}  T = {}\n", plan.alloc, fmt_exact(&plan.time.t_total));
    }
    Ok(())
}
