//! Monte Carlo sampling of the circuit output.
//!
//! Shots are drawn in fixed-size chunks. Chunk `k` uses its own ChaCha stream
//! (`seed`, stream `k`) and only produces an outcome histogram, so summing the
//! histograms gives the same counts whatever the execution strategy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{exact_kernel_mean, Estimator, OutcomeDistribution};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Shots per independent stream.
pub const CHUNK_SHOTS: u64 = 1 << 16;

/// Sample mean of an estimator kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleEstimate {
    pub estimator: Estimator,
    /// Mean of the kernel: the squared quantity, or the signed commutator term.
    pub value: f64,
    /// Sample standard deviation over `sqrt(shots)`; `None` for a single shot.
    pub std_error: Option<f64>,
    pub shots: u64,
    pub seed: u64,
}

impl SampleEstimate {
    /// The reported quantity (square root or modulus of `value`) with a
    /// first-order propagated error. Negative radicands from sampling noise are
    /// clipped to zero.
    pub fn finished(&self) -> (f64, Option<f64>) {
        match self.estimator {
            Estimator::CommutatorBound => (self.value.abs(), self.std_error),
            _ => {
                let root = self.value.max(0.0).sqrt();
                let se = self.std_error.map(|s| {
                    if root > 0.0 {
                        s / (2.0 * root)
                    } else {
                        s.sqrt()
                    }
                });
                (root, se)
            }
        }
    }
}

/// Outcome histogram plus the requested estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRun {
    pub shots: u64,
    pub seed: u64,
    /// Counts aligned with `OutcomeDistribution::entries`.
    pub counts: Vec<u64>,
    pub estimates: Vec<SampleEstimate>,
}

impl SampleRun {
    pub fn estimate(&self, est: Estimator) -> Option<&SampleEstimate> {
        self.estimates.iter().find(|e| e.estimator == est)
    }
}

fn cdf(dist: &OutcomeDistribution) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = dist
        .entries
        .iter()
        .map(|(_, p)| {
            acc += p.max(0.0);
            acc
        })
        .collect();
    let total = acc;
    for c in &mut out {
        *c /= total;
    }
    // Rounding may leave the tail a hair under 1; pin it at the last
    // outcome with positive weight so zero-weight entries stay unreachable.
    if let Some(last) = dist.entries.iter().rposition(|(_, p)| *p > 0.0) {
        out[last..].iter_mut().for_each(|c| *c = 1.0);
    }
    out
}

fn chunk_histogram(cdf: &[f64], seed: u64, chunk: u64, shots: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut counts = vec![0u64; cdf.len()];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        counts[k] += 1;
    }
    counts
}

/// Histogram of `shots` draws from `dist`.
pub fn sample_counts(
    dist: &OutcomeDistribution,
    shots: u64,
    seed: u64,
    exec: Execution,
) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    if dist.entries.is_empty() {
        return Err(Error::InvalidArgument("empty outcome distribution".into()));
    }
    let cdf = cdf(dist);
    let chunks = shots.div_ceil(CHUNK_SHOTS);
    let partial = exec.map_range(chunks as usize, |k| {
        let k = k as u64;
        let n = CHUNK_SHOTS.min(shots - k * CHUNK_SHOTS);
        chunk_histogram(&cdf, seed, k, n)
    });
    let mut counts = vec![0u64; cdf.len()];
    for h in partial {
        for (c, x) in counts.iter_mut().zip(h) {
            *c += x;
        }
    }
    Ok(counts)
}

/// Kernel mean and standard error from a histogram.
pub fn estimate_from_counts(
    dist: &OutcomeDistribution,
    counts: &[u64],
    est: Estimator,
    seed: u64,
) -> SampleEstimate {
    let shots: u64 = counts.iter().sum();
    let n = shots as f64;
    let values: Vec<f64> = dist
        .entries
        .iter()
        .map(|(o, _)| est.kernel(o, dist.system_dim))
        .collect();
    let mean = values
        .iter()
        .zip(counts)
        .map(|(v, &c)| v * c as f64)
        .sum::<f64>()
        / n;
    let std_error = (shots > 1).then(|| {
        let ss: f64 = values
            .iter()
            .zip(counts)
            .map(|(v, &c)| c as f64 * (v - mean).powi(2))
            .sum();
        (ss / (n - 1.0)).sqrt() / n.sqrt()
    });
    SampleEstimate {
        estimator: est,
        value: mean,
        std_error,
        shots,
        seed,
    }
}

pub fn sample(
    dist: &OutcomeDistribution,
    estimators: &[Estimator],
    shots: u64,
    seed: u64,
) -> Result<SampleRun> {
    sample_with(dist, estimators, shots, seed, Execution::default())
}

pub fn sample_with(
    dist: &OutcomeDistribution,
    estimators: &[Estimator],
    shots: u64,
    seed: u64,
    exec: Execution,
) -> Result<SampleRun> {
    let counts = sample_counts(dist, shots, seed, exec)?;
    let estimates = estimators
        .iter()
        .map(|&e| estimate_from_counts(dist, &counts, e, seed))
        .collect();
    Ok(SampleRun {
        shots,
        seed,
        counts,
        estimates,
    })
}

/// Exact kernel means for comparison with a sampled run.
pub fn exact_estimates(
    dist: &OutcomeDistribution,
    estimators: &[Estimator],
) -> Vec<(Estimator, f64)> {
    estimators
        .iter()
        .map(|&e| (e, exact_kernel_mean(dist, e)))
        .collect()
}
