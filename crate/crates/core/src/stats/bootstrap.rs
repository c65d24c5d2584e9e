//! Paired bootstrap significance test over per-document scores.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_ITERATIONS: usize = 100_000;
pub const DEFAULT_SEED: u64 = 42;

/// Resampling iterations drawn from one random stream.
///
/// Block `k` covers iterations `k * BLOCK .. (k + 1) * BLOCK` and draws from
/// `ChaCha8Rng::seed_from_u64(seed)` switched to stream `k`, one
/// `random_range(0..n)` index per resampled document. The result is therefore
/// independent of the number of worker threads.
pub const BLOCK: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapResult {
    /// `mean(a) - mean(b)` on the original documents.
    pub observed_delta: f64,
    pub p_value: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl BootstrapResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// One-sided paired bootstrap test that system A beats system B.
///
/// Documents are resampled with replacement; `p` is the fraction of resamples
/// whose delta is at least twice the observed delta. Deltas are computed as
/// means of the per-document differences `a[i] - b[i]`.
pub fn paired_bootstrap(
    scores_a: &[f64],
    scores_b: &[f64],
    iterations: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    if scores_a.len() != scores_b.len() {
        return Err(Error::LengthMismatch(scores_a.len(), scores_b.len()));
    }
    if scores_a.len() < 2 {
        return Err(Error::EmptyInput(format!(
            "paired bootstrap needs at least 2 documents, got {}",
            scores_a.len()
        )));
    }
    if iterations == 0 {
        return Err(Error::EmptyInput("iterations must be at least 1".into()));
    }
    let diffs: Vec<f64> = scores_a.iter().zip(scores_b).map(|(a, b)| a - b).collect();
    let n = diffs.len();
    let observed = diffs.iter().sum::<f64>() / n as f64;
    let threshold = 2.0 * observed;

    let blocks = iterations.div_ceil(BLOCK);
    let hits: usize = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block as u64);
            let todo = BLOCK.min(iterations - block * BLOCK);
            let mut count = 0usize;
            for _ in 0..todo {
                let mut sum = 0.0;
                for _ in 0..n {
                    sum += diffs[rng.random_range(0..n)];
                }
                if sum / n as f64 >= threshold {
                    count += 1;
                }
            }
            count
        })
        .sum();

    Ok(BootstrapResult {
        observed_delta: observed,
        p_value: hits as f64 / iterations as f64,
        iterations,
        seed,
    })
}
