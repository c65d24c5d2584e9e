//! Paired bootstrap test on per-document F1 of two systems.
//!
//!     cargo run --release --example bootstrap_compare

use aspect_eval::stats::paired_bootstrap;
use rand::{Rng, SeedableRng};

fn main() -> aspect_eval::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let b: Vec<f64> = (0..500).map(|_| rng.random_range(0.3..0.9)).collect();
    let close: Vec<f64> = b.iter().map(|x| (x + rng.random_range(-0.1..0.11)).clamp(0.0, 1.0)).collect();
    let better: Vec<f64> = b.iter().map(|x| (x + rng.random_range(-0.05..0.2)).clamp(0.0, 1.0)).collect();

    for (name, a) in [("close", &close), ("better", &better)] {
        let r = paired_bootstrap(a, &b, 100_000, 42)?;
        println!(
            "{name:>6}: delta={:+.4} p={:.4} significant at 0.05: {}",
            r.observed_delta,
            r.p_value,
            r.significant(0.05)
        );
    }
    Ok(())
}
