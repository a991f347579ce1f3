//! Percentile bootstrap confidence interval for the AUC.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::rank::auc_roc;
use super::StatsError;

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const MIN_RESAMPLES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapCi {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub resamples: usize,
    /// Resamples that drew a single class and were discarded.
    pub skipped: usize,
    pub seed: u64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Resamples repositories with replacement. Resample `i` draws from ChaCha8
/// stream `i` under `seed`, so the interval does not depend on thread count.
pub fn bootstrap_auc_ci(
    scores: &[f64],
    labels: &[bool],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapCi, StatsError> {
    auc_roc(scores, labels)?;
    if resamples < MIN_RESAMPLES {
        return Err(StatsError::TooFewResamples { min: MIN_RESAMPLES, got: resamples });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::InvalidLevel(level));
    }
    let n = scores.len();
    let draws: Vec<Option<f64>> = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut s = Vec::with_capacity(n);
            let mut l = Vec::with_capacity(n);
            for _ in 0..n {
                let k = rng.gen_range(0..n);
                s.push(scores[k]);
                l.push(labels[k]);
            }
            auc_roc(&s, &l).ok()
        })
        .collect();
    let mut aucs: Vec<f64> = draws.iter().flatten().copied().collect();
    let skipped = resamples - aucs.len();
    if aucs.is_empty() {
        return Err(StatsError::SingleClass);
    }
    aucs.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok(BootstrapCi {
        lo: quantile(&aucs, tail),
        hi: quantile(&aucs, 1.0 - tail),
        level,
        resamples,
        skipped,
        seed,
    })
}
