//! Flattening: split element `i` into `m_i` equal-mass buckets.
//!
//! A flattening is a fixed map, so two distributions pushed through the same
//! [`Flattening`] keep their ℓ1 distance while heavy elements get spread out.
//! Bucket `(i, j)` (both 1-based) has flat index `offset_i + j`, where the
//! offsets are prefix sums of the bucket counts.

use rand::Rng;
use rand_distr::{Binomial, Distribution as _};
use thiserror::Error;

use crate::dist::{Distribution, SampleBatch};
use crate::rng::SeededRng;

/// Upward nudge applied before flooring `p̂_i / ν`, relative to `max(1, x)`.
const FLOOR_NUDGE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlattenError {
    #[error("domain mismatch: flattening over {flattening}, input over {input}")]
    DomainMismatch { flattening: usize, input: usize },
    #[error("nu = {0} outside (0, 1]")]
    NuOutOfRange(f64),
    #[error("v = {0} outside (0, 1]")]
    VOutOfRange(f64),
    #[error("index {index} outside domain [1, {n}]")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("bucket count for element {0} is zero")]
    ZeroBucket(usize),
}

fn nudged_floor(x: f64) -> u64 {
    (x + FLOOR_NUDGE * x.max(1.0)).floor() as u64
}

fn check_domain(f: &Flattening, input: usize) -> Result<(), FlattenError> {
    if f.n() != input {
        return Err(FlattenError::DomainMismatch {
            flattening: f.n(),
            input,
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flattening {
    buckets: Vec<u64>,
    // offsets[k] = buckets[0] + ... + buckets[k-1]; one extra trailing entry
    // holding the flat domain size.
    offsets: Vec<u64>,
}

impl Flattening {
    pub fn from_buckets(buckets: Vec<u64>) -> Result<Self, FlattenError> {
        if let Some(k) = buckets.iter().position(|&m| m == 0) {
            return Err(FlattenError::ZeroBucket(k + 1));
        }
        let mut offsets = Vec::with_capacity(buckets.len() + 1);
        let mut acc = 0u64;
        offsets.push(0);
        for &m in &buckets {
            acc += m;
            offsets.push(acc);
        }
        Ok(Self { buckets, offsets })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_buckets(vec![1; n]).expect("unit buckets")
    }

    /// Original domain size.
    pub fn n(&self) -> usize {
        self.buckets.len()
    }

    /// Flattened domain size `N′ = Σ m_i`.
    pub fn flat_size(&self) -> usize {
        *self.offsets.last().expect("offsets has n + 1 entries") as usize
    }

    pub fn buckets(&self) -> &[u64] {
        &self.buckets
    }

    /// `m_i` for the 1-based element `index`.
    pub fn bucket_count(&self, index: usize) -> u64 {
        self.buckets[index - 1]
    }

    /// Flat index of bucket `j` (1-based) of element `i` (1-based).
    pub fn flat_index(&self, i: usize, j: u64) -> usize {
        debug_assert!(j >= 1 && j <= self.buckets[i - 1]);
        (self.offsets[i - 1] + j) as usize
    }

    /// Inverse of [`Flattening::flat_index`].
    pub fn unflatten(&self, flat: usize) -> Result<(usize, u64), FlattenError> {
        if flat == 0 || flat > self.flat_size() {
            return Err(FlattenError::IndexOutOfRange {
                index: flat,
                n: self.flat_size(),
            });
        }
        let flat = flat as u64;
        let i = self.offsets.partition_point(|&o| o < flat);
        Ok((i, flat - self.offsets[i - 1]))
    }
}

/// `m_i = ⌊p̂_i/ν⌋ + f_i + 1`.
pub fn build_augmented_flattening(
    phat: &Distribution,
    freqs: &SampleBatch,
    nu: f64,
) -> Result<Flattening, FlattenError> {
    if phat.len() != freqs.len() {
        return Err(FlattenError::DomainMismatch {
            flattening: phat.len(),
            input: freqs.len(),
        });
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(FlattenError::NuOutOfRange(nu));
    }
    let buckets = phat
        .probs()
        .iter()
        .zip(freqs.counts())
        .map(|(&p, &f)| nudged_floor(p / nu) + f + 1)
        .collect();
    Flattening::from_buckets(buckets)
}

/// `m_i = ⌊p̂_i/v⌋ + 1`.
pub fn build_multiplicative_flattening(
    phat: &Distribution,
    v: f64,
) -> Result<Flattening, FlattenError> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(FlattenError::VOutOfRange(v));
    }
    let buckets = phat
        .probs()
        .iter()
        .map(|&p| nudged_floor(p / v) + 1)
        .collect();
    Flattening::from_buckets(buckets)
}

/// `p^F`: mass `p_i / m_i` on each bucket of element `i`.
pub fn flatten_distribution(
    f: &Flattening,
    p: &Distribution,
) -> Result<Distribution, FlattenError> {
    check_domain(f, p.len())?;
    let mut out = Vec::with_capacity(f.flat_size());
    for (&pi, &m) in p.probs().iter().zip(&f.buckets) {
        let share = pi / m as f64;
        out.extend(std::iter::repeat_n(share, m as usize));
    }
    Ok(Distribution::new(out).expect("flattening preserves total mass"))
}

/// Maps one sample `i` of `p` to a uniformly chosen bucket of `i`.
pub fn flatten_sample<R: Rng + ?Sized>(
    f: &Flattening,
    i: usize,
    rng: &mut R,
) -> Result<usize, FlattenError> {
    if i == 0 || i > f.n() {
        return Err(FlattenError::IndexOutOfRange { index: i, n: f.n() });
    }
    let j = rng.random_range(1..=f.buckets[i - 1]);
    Ok(f.flat_index(i, j))
}

/// Flattens a whole frequency vector: the `c_i` samples of element `i` are
/// spread over its buckets as a uniform multinomial. Equal in law to calling
/// [`flatten_sample`] on every sample.
pub fn flatten_batch(
    f: &Flattening,
    batch: &SampleBatch,
    rng: &mut SeededRng,
) -> Result<SampleBatch, FlattenError> {
    check_domain(f, batch.len())?;
    let mut out = vec![0u64; f.flat_size()];
    for (k, &c) in batch.counts().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let m = f.buckets[k];
        let base = f.offsets[k] as usize;
        if m == 1 {
            out[base] = c;
        } else if c <= m {
            for _ in 0..c {
                out[base + rng.random_range(0..m) as usize] += 1;
            }
        } else {
            let mut remaining = c;
            for j in 0..m {
                if remaining == 0 {
                    break;
                }
                let cells_left = m - j;
                let x = if cells_left == 1 {
                    remaining
                } else {
                    Binomial::new(remaining, 1.0 / cells_left as f64)
                        .expect("valid binomial parameters")
                        .sample(rng)
                };
                out[base + j as usize] = x;
                remaining -= x;
            }
        }
    }
    Ok(SampleBatch::from_counts(out))
}

/// `Σ p_i²`.
pub fn l2sq_exact(p: &Distribution) -> f64 {
    p.probs().iter().map(|v| v * v).sum()
}
