//! Lower bounds on the communication load: the generic counting bound for an
//! arbitrary placement, and the solver/helper bound that meets the scheme.
//!
//! ```not_rust
//! cargo run --example converse_bounds
//! ```

use std::collections::BTreeSet;

use hybrid_cdc::bounds::{enhanced_lower_bound, lemma1_bound, tally_a, tally_b};
use hybrid_cdc::math::{fmt_exact, frac, int};
use hybrid_cdc::model::build_reduce_assignment;
use hybrid_cdc::simulator::{layout, run, SimOptions};
use hybrid_cdc::{Allocation, Placement, SystemParams, TaskParams};

fn main() -> hybrid_cdc::Result<()> {
    let task = TaskParams::new(48, 4, 1, 8)?;
    let system = SystemParams::new(6, 144, int(1), int(1), int(0))?;
    let alloc = Allocation::new(frac(1, 2), 2, 1, 4, 2);
    let l = layout(&alloc, &task, system.k)?;
    let b = tally_b(&l.placement, &l.assignment);
    let eb = enhanced_lower_bound(&b, task.s, alloc.ks, task.q, task.n)?;
    let measured = run(&alloc, &task, &system, 0, SimOptions::default())?.measured_load;
    println!("scheme {alloc}");
    println!("  generic bound  {}", fmt_exact(&lemma1_bound(&tally_a(&l.placement, &l.assignment), task.n, task.q)));
    println!("  enhanced bound {}", fmt_exact(&eb.bound));
    println!("  measured load  {}", fmt_exact(&measured));

    // Every file on two of four nodes, chosen cyclically.
    let mut sets = vec![BTreeSet::new(); 4];
    for f in 1..=8usize {
        sets[f % 4].insert(f);
        sets[(f + 1) % 4].insert(f);
    }
    let p = Placement::from_node_sets(8, sets)?;
    let w = build_reduce_assignment(&[1, 2, 3, 4], 1, 4)?;
    let b = tally_b(&p, &w);
    println!("cyclic placement, r = {}", fmt_exact(&b.r1().unwrap_or_default()));
    println!("  generic bound  {}", fmt_exact(&lemma1_bound(&tally_a(&p, &w), 8, 4)));
    println!("  enhanced bound {}", fmt_exact(&enhanced_lower_bound(&b, 1, 4, 4, 8)?.bound));
    Ok(())
}
