//! pass@1 solve rates and percentile-bootstrap confidence intervals.
//!
//! Resampling is reproducible across implementations:
//!
//! 1. A SplitMix64 generator is seeded with the seed as its raw state.
//! 2. Resample `r` (0-based) draws the `r`-th SplitMix64 output `s_r` and
//!    seeds a xoshiro256++ generator from `s_r`. The four state words are the
//!    next four outputs of a fresh SplitMix64 whose state is `s_r`.
//! 3. Each of the `n` draws takes `x = next_u64()` and picks index
//!    `(x * n) >> 64`, computed in 128 bits.
//! 4. The resample's rate is `100 * solved / n`. The interval endpoints are
//!    type-7 (linear interpolation) percentiles of the sorted rates.
//!
//! Every resample owns its generator, so the result does not depend on
//! whether resamples run sequentially or in parallel.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_RESAMPLES: usize = 1000;
pub const DEFAULT_LEVEL: f64 = 0.95;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("no outcomes to aggregate")]
    Empty,
    #[error("resample count must be at least 1")]
    NoResamples,
    #[error("confidence level must lie strictly between 0 and 1, got {0}")]
    InvalidLevel(f64),
}

/// A percentage solve rate over `n` problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveRate {
    pub n: usize,
    pub solved: usize,
    pub point: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

impl SolveRate {
    pub fn half_width(&self) -> Option<f64> {
        Some((self.ci_high? - self.ci_low?) / 2.0)
    }
}

/// Bootstrap parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for Bootstrap {
    fn default() -> Self {
        Bootstrap {
            resamples: DEFAULT_RESAMPLES,
            level: DEFAULT_LEVEL,
            seed: DEFAULT_SEED,
        }
    }
}

impl Bootstrap {
    pub fn with_seed(seed: u64) -> Self {
        Bootstrap {
            seed,
            ..Bootstrap::default()
        }
    }
}

/// Point estimate only.
pub fn pass_at_1(outcomes: &[bool]) -> Result<SolveRate, StatsError> {
    if outcomes.is_empty() {
        return Err(StatsError::Empty);
    }
    let solved = outcomes.iter().filter(|s| **s).count();
    Ok(SolveRate {
        n: outcomes.len(),
        solved,
        point: 100.0 * solved as f64 / outcomes.len() as f64,
        ci_low: None,
        ci_high: None,
    })
}

/// Point estimate plus bootstrap interval, widened if needed so that it
/// contains the point.
pub fn solve_rate(outcomes: &[bool], bootstrap: &Bootstrap) -> Result<SolveRate, StatsError> {
    let rate = pass_at_1(outcomes)?;
    let (low, high) = bootstrap_ci(outcomes, bootstrap.resamples, bootstrap.level, bootstrap.seed)?;
    Ok(SolveRate {
        ci_low: Some(low.min(rate.point)),
        ci_high: Some(high.max(rate.point)),
        ..rate
    })
}

fn validate(outcomes: &[bool], resamples: usize, level: f64) -> Result<(), StatsError> {
    if outcomes.is_empty() {
        return Err(StatsError::Empty);
    }
    if resamples == 0 {
        return Err(StatsError::NoResamples);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::InvalidLevel(level));
    }
    Ok(())
}

fn resample_seeds(resamples: usize, seed: u64) -> Vec<u64> {
    let mut master = SplitMix64::seed_from_u64(seed);
    (0..resamples).map(|_| master.next_u64()).collect()
}

fn resample_rate(outcomes: &[bool], seed: u64) -> f64 {
    let n = outcomes.len();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let solved = (0..n)
        .filter(|_| {
            let index = ((rng.next_u64() as u128 * n as u128) >> 64) as usize;
            outcomes[index]
        })
        .count();
    100.0 * solved as f64 / n as f64
}

fn interval(mut rates: Vec<f64>, level: f64) -> (f64, f64) {
    rates.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (percentile(&rates, tail), percentile(&rates, 1.0 - tail))
}

/// Type-7 percentile of sorted, non-empty data.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile interval of resampled solve rates, single-threaded.
pub fn bootstrap_ci_sequential(
    outcomes: &[bool],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64), StatsError> {
    validate(outcomes, resamples, level)?;
    let rates = resample_seeds(resamples, seed)
        .into_iter()
        .map(|s| resample_rate(outcomes, s))
        .collect();
    Ok(interval(rates, level))
}

/// Percentile interval of resampled solve rates, resamples spread over the
/// rayon pool.
#[cfg(feature = "parallel")]
pub fn bootstrap_ci_parallel(
    outcomes: &[bool],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64), StatsError> {
    use rayon::prelude::*;
    validate(outcomes, resamples, level)?;
    let rates = resample_seeds(resamples, seed)
        .into_par_iter()
        .map(|s| resample_rate(outcomes, s))
        .collect();
    Ok(interval(rates, level))
}

pub fn bootstrap_ci(outcomes: &[bool], resamples: usize, level: f64, seed: u64) -> Result<(f64, f64), StatsError> {
    #[cfg(feature = "parallel")]
    {
        bootstrap_ci_parallel(outcomes, resamples, level, seed)
    }
    #[cfg(not(feature = "parallel"))]
    {
        bootstrap_ci_sequential(outcomes, resamples, level, seed)
    }
}
