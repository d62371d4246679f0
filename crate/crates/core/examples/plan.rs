//! Plan the minimum-time allocation for a JSON config.
//!
//! ```not_rust
//! cargo run --example plan -- crates/core/configs/cascaded.json
//! ```

use hybrid_cdc::cli::Config;
use hybrid_cdc::math::fmt_both;
use hybrid_cdc::planner::{optimize, PlanOptions};

fn main() -> hybrid_cdc::Result<()> {
    let path =
        std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/example2.json").into());
    let cfg = Config::load(path.as_ref())?;
    for require_simulatable in [false, true] {
        let plan = optimize(&cfg.task, &cfg.system, PlanOptions { require_simulatable })?;
        println!("require_simulatable = {require_simulatable}");
        println!("  {}", plan.alloc);
        println!("  T_map = {}", fmt_both(&plan.time.t_map));
        println!("  T_shuffle = {}", fmt_both(&plan.time.t_shuffle));
        println!("  T_reduce = {}", fmt_both(&plan.time.t_reduce));
        println!("  T_total = {} (raw loads: {})", fmt_both(&plan.time.t_total), fmt_both(&plan.raw_time.t_total));
    }
    Ok(())
}
