//! Squared ℓ2-norm estimation from sample collisions.

use rand::RngCore;
use rayon::prelude::*;

use crate::dist::SampleBatch;
use crate::oracle::{OracleError, SampleOracle};
use crate::rng::{child_seed, SeededRng};

/// Samples per repetition, in units of `√n`.
pub const SAMPLES_PER_SQRT_N: f64 = 160.0;
/// Repetitions, in units of `ln(1/δ)`.
pub const REPETITIONS_PER_LOG: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L2Estimate {
    /// Estimate of `‖p‖₂²`.
    pub value: f64,
    pub repetitions: u64,
    pub samples_per_rep: u64,
}

impl L2Estimate {
    pub fn total_samples(&self) -> u64 {
        self.repetitions * self.samples_per_rep
    }
}

/// Number of colliding pairs, `Σ C(f_i, 2)`.
pub fn collision_count(batch: &SampleBatch) -> u128 {
    batch
        .counts()
        .iter()
        .map(|&c| {
            let c = c as u128;
            c * c.saturating_sub(1) / 2
        })
        .sum()
}

/// `X / C(s, 2)` for a batch of `s` samples; 0 when `s < 2`.
pub fn collision_rate(batch: &SampleBatch) -> f64 {
    let s = batch.total() as u128;
    if s < 2 {
        return 0.0;
    }
    collision_count(batch) as f64 / (s * (s - 1) / 2) as f64
}

pub fn repetitions_for(delta: f64) -> u64 {
    (REPETITIONS_PER_LOG * (1.0 / delta).ln()).ceil().max(1.0) as u64
}

pub fn samples_per_rep_for(n: usize) -> u64 {
    (SAMPLES_PER_SQRT_N * (n as f64).sqrt()).ceil().max(2.0) as u64
}

/// Median of `r = ⌈8 ln(1/δ)⌉` collision rates, each from `s = ⌈160√n⌉`
/// fresh samples of `source`, where `n` is the oracle's domain size.
///
/// With probability `1 − δ` the result lies in `[‖p‖₂²/2, 3‖p‖₂²/2]`.
///
/// # Panics
/// If `delta` is not in `(0, 1)`.
pub fn estimate_l2sq<O: SampleOracle + ?Sized>(
    source: &O,
    delta: f64,
    rng: &mut SeededRng,
) -> Result<L2Estimate, OracleError> {
    assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    let r = repetitions_for(delta);
    let s = samples_per_rep_for(source.domain_size());
    let base = rng.next_u64();
    let mut rates = (0..r)
        .into_par_iter()
        .map(|k| {
            let mut rep_rng = SeededRng::new(child_seed(base, k));
            source.draw(&mut rep_rng, s).map(|b| collision_rate(&b))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(L2Estimate {
        value: median(&mut rates),
        repetitions: r,
        samples_per_rep: s,
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}
