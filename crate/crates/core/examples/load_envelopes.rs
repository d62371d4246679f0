//! Communication loads of both subsystems and their lower convex envelopes.
//!
//! ```not_rust
//! cargo run --example load_envelopes -- 2 6
//! ```

use hybrid_cdc::loads::{l1, l1_envelope, l2, l2_envelope};
use hybrid_cdc::math::fmt_exact;

fn main() -> hybrid_cdc::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let s = args.next().unwrap_or(2);
    let ks = args.next().unwrap_or(6);
    let (e1, e2) = (l1_envelope(s, ks)?, l2_envelope(s, ks)?);
    println!("s = {s}, Ks = {ks}");
    println!(" r  {:>12} {:>12} {:>12} {:>12}", "l1", "env1", "l2", "env2");
    for r in 0..=ks {
        let show =
            |x: hybrid_cdc::Result<hybrid_cdc::Rational>| x.map(|v| fmt_exact(&v)).unwrap_or_else(|_| "-".into());
        println!(
            "{r:>2}  {:>12} {:>12} {:>12} {:>12}",
            show(l1(r, s, ks)),
            show(e1.eval_at(r)),
            show(l2(r, s, ks)),
            show(e2.eval_at(r))
        );
    }
    Ok(())
}
