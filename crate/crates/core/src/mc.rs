//! Reproducible parallel Monte Carlo plumbing.
//!
//! Sample `i` of a run with seed `s` always draws from ChaCha8 keyed by `s`
//! on stream `i`, so its value does not depend on scheduling. Samples are
//! grouped into fixed-size blocks whose partial statistics are merged in
//! block order, which makes every reduction bit-identical for any worker
//! count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};

/// Number of samples per reduction block.
pub const BLOCK: u64 = 1024;

pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `f` on consecutive index ranges of length [`BLOCK`] and returns the
/// per-block results in block order.
pub fn run_blocks<T, F>(n_samples: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> T + Sync + Send,
{
    if workers == 0 {
        return Err(invalid("worker count must be at least 1"));
    }
    let n_blocks = n_samples.div_ceil(BLOCK);
    let block = |b: u64| {
        let start = b * BLOCK;
        f(start..(start + BLOCK).min(n_samples))
    };
    if workers == 1 {
        return Ok((0..n_blocks).map(block).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(|| (0..n_blocks).into_par_iter().map(block).collect()))
}

/// Running mean and variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAccumulator {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * self.n as f64 * other.n as f64 / n as f64;
        self.n = n;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Mean of `exp(l_i)` for log-weights `l_i`, kept relative to a running shift
/// so that weights far outside the f64 range still average correctly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMeanAccumulator {
    shift: f64,
    scaled: MeanAccumulator,
}

impl Default for LogMeanAccumulator {
    fn default() -> Self {
        Self {
            shift: f64::NEG_INFINITY,
            scaled: MeanAccumulator::default(),
        }
    }
}

impl LogMeanAccumulator {
    pub fn push_log(&mut self, log_w: f64) {
        if log_w > self.shift {
            self.rescale(log_w);
        }
        let x = if log_w == f64::NEG_INFINITY {
            0.0
        } else {
            (log_w - self.shift).exp()
        };
        self.scaled.push(x);
    }

    fn rescale(&mut self, new_shift: f64) {
        if self.shift != f64::NEG_INFINITY {
            let r = (self.shift - new_shift).exp();
            self.scaled.mean *= r;
            self.scaled.m2 *= r * r;
        }
        self.shift = new_shift;
    }

    pub fn merge(&mut self, other: &Self) {
        if other.scaled.n == 0 {
            return;
        }
        let mut other = *other;
        if other.shift > self.shift {
            self.rescale(other.shift);
        } else {
            other.rescale(self.shift);
        }
        self.scaled.merge(&other.scaled);
    }

    pub fn n(&self) -> u64 {
        self.scaled.n
    }

    /// Logarithm of the sample mean of the weights.
    pub fn log_mean(&self) -> f64 {
        self.shift + self.scaled.mean.ln()
    }

    /// Standard error of the mean divided by the mean.
    pub fn rel_std_error(&self) -> f64 {
        self.scaled.std_error() / self.scaled.mean
    }
}

/// Parallel estimate of `E[exp(log_weight(i))]` over samples `0..n`.
pub fn log_mean<F>(n_samples: u64, workers: usize, log_weight: F) -> Result<LogMeanAccumulator>
where
    F: Fn(u64) -> f64 + Sync + Send,
{
    let blocks = run_blocks(n_samples, workers, |range| {
        let mut acc = LogMeanAccumulator::default();
        for i in range {
            acc.push_log(log_weight(i));
        }
        acc
    })?;
    Ok(blocks
        .iter()
        .fold(LogMeanAccumulator::default(), |mut acc, b| {
            acc.merge(b);
            acc
        }))
}

/// Parallel estimate of `E[value(i)]` over samples `0..n`.
pub fn mean<F>(n_samples: u64, workers: usize, value: F) -> Result<MeanAccumulator>
where
    F: Fn(u64) -> f64 + Sync + Send,
{
    let blocks = run_blocks(n_samples, workers, |range| {
        let mut acc = MeanAccumulator::default();
        for i in range {
            acc.push(value(i));
        }
        acc
    })?;
    Ok(blocks
        .iter()
        .fold(MeanAccumulator::default(), |mut acc, b| {
            acc.merge(b);
            acc
        }))
}

/// Parallel count of samples for which `violates(i)` holds.
pub fn count<F>(n_samples: u64, workers: usize, violates: F) -> Result<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    let blocks = run_blocks(n_samples, workers, |range| {
        range.filter(|&i| violates(i)).count() as u64
    })?;
    Ok(blocks.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_independent_of_order() {
        let a: f64 = sample_rng(7, 3).random();
        let _ = sample_rng(7, 2).random::<f64>();
        let b: f64 = sample_rng(7, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, sample_rng(7, 4).random::<f64>());
        assert_ne!(a, sample_rng(8, 3).random::<f64>());
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = MeanAccumulator::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut left = MeanAccumulator::default();
        let mut right = MeanAccumulator::default();
        xs[..333].iter().for_each(|&x| left.push(x));
        xs[333..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        assert!((left.mean - all.mean).abs() < 1e-12);
        assert!((left.variance() - all.variance()).abs() < 1e-10);
    }

    #[test]
    fn log_mean_survives_huge_weights() {
        let mut acc = LogMeanAccumulator::default();
        acc.push_log(1000.0);
        acc.push_log(1000.0 + 2f64.ln());
        let mut other = LogMeanAccumulator::default();
        other.push_log(1000.0 + 3f64.ln());
        acc.merge(&other);
        assert!((acc.log_mean() - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn reductions_identical_across_worker_counts() {
        let f = |i: u64| sample_rng(11, i).random::<f64>().ln();
        let one = log_mean(5000, 1, f).unwrap();
        let four = log_mean(5000, 4, f).unwrap();
        assert_eq!(one.log_mean().to_bits(), four.log_mean().to_bits());
        assert_eq!(
            one.rel_std_error().to_bits(),
            four.rel_std_error().to_bits()
        );
        assert!(run_blocks(10, 0, |_| ()).is_err());
    }
}
