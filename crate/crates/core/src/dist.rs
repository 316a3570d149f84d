//! Discrete distributions over `[n]`, index sets, sample batches and the
//! basic operations on them (total variation, Scheffé sets, sampling,
//! mixing, Poissonization).

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution as _, Poisson};
use thiserror::Error;

use crate::rng::SeededRng;

/// Largest accepted deviation of an input vector's sum from 1.
pub const INPUT_SUM_TOLERANCE: f64 = 1e-6;
/// Deviation from 1 maintained by every constructed [`Distribution`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;
/// Sums this close to 1 are kept bit-exact instead of being rescaled.
const RESCALE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("probability vector is empty")]
    Empty,
    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("non-finite probability at index {index}")]
    NonFinite { index: usize },
    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("domain mismatch: {left} vs {right}")]
    DomainMismatch { left: usize, right: usize },
    #[error("mixing weight {0} outside [0, 1]")]
    BetaOutOfRange(f64),
    #[error("index {index} outside domain [1, {n}]")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("sample batch is empty")]
    EmptyBatch,
}

pub(crate) fn ensure_same_domain(left: usize, right: usize) -> Result<(), DistError> {
    if left != right {
        return Err(DistError::DomainMismatch { left, right });
    }
    Ok(())
}

/// A probability vector over `[n]`.
///
/// Entries are non-negative and sum to 1 within [`NORMALIZATION_TOLERANCE`].
/// Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates `probs`, rescaling when the sum is within
    /// [`INPUT_SUM_TOLERANCE`] of 1 (but not already within 1e-12).
    pub fn new(mut probs: Vec<f64>) -> Result<Self, DistError> {
        if probs.is_empty() {
            return Err(DistError::Empty);
        }
        for (i, &v) in probs.iter().enumerate() {
            if !v.is_finite() {
                return Err(DistError::NonFinite { index: i + 1 });
            }
            if v < 0.0 {
                return Err(DistError::NegativeProbability {
                    index: i + 1,
                    value: v,
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > INPUT_SUM_TOLERANCE {
            return Err(DistError::NotNormalized { sum });
        }
        if (sum - 1.0).abs() > RESCALE_THRESHOLD {
            probs.iter_mut().for_each(|v| *v /= sum);
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution needs a non-empty domain");
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// All mass on `index` (1-based).
    pub fn point_mass(n: usize, index: usize) -> Result<Self, DistError> {
        if index == 0 || index > n {
            return Err(DistError::IndexOutOfRange { index, n });
        }
        let mut probs = vec![0.0; n];
        probs[index - 1] = 1.0;
        Ok(Self { probs })
    }

    /// Domain size `n`.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of element `index` (1-based).
    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index - 1]
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }
}

/// Validating constructor; see [`Distribution::new`].
pub fn make_distribution(probs: Vec<f64>) -> Result<Distribution, DistError> {
    Distribution::new(probs)
}

/// A sorted set of distinct 1-based indices in `[1, n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    n: usize,
    members: Vec<usize>,
}

impl IndexSet {
    pub fn new(n: usize, mut members: Vec<usize>) -> Result<Self, DistError> {
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&i| i == 0 || i > n) {
            return Err(DistError::IndexOutOfRange { index: bad, n });
        }
        Ok(Self { n, members })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            members: Vec::new(),
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            members: (1..=n).collect(),
        }
    }

    pub fn domain(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }
}

/// Frequency representation of a multiset of samples from `[n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleBatch {
    counts: Vec<u64>,
    total: u64,
}

impl SampleBatch {
    pub fn zeros(n: usize) -> Self {
        Self {
            counts: vec![0; n],
            total: 0,
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }

    /// Builds the batch from a sequence of 1-based sample values.
    pub fn from_samples<I>(n: usize, samples: I) -> Result<Self, DistError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut batch = Self::zeros(n);
        for s in samples {
            if s == 0 || s > n {
                return Err(DistError::IndexOutOfRange { index: s, n });
            }
            batch.add(s, 1);
        }
        Ok(batch)
    }

    /// Domain size `n`.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Count of element `index` (1-based).
    pub fn count(&self, index: usize) -> u64 {
        self.counts[index - 1]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Adds `k` occurrences of element `index` (1-based).
    pub fn add(&mut self, index: usize, k: u64) {
        self.counts[index - 1] += k;
        self.total += k;
    }
}

/// Total variation distance `½ Σ |p_i − q_i|`.
pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<f64, DistError> {
    ensure_same_domain(p.len(), q.len())?;
    let l1: f64 = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok((0.5 * l1).clamp(0.0, 1.0))
}

/// The Scheffé set `{i : p̂_i < q_i}`; ties stay outside.
pub fn scheffe_set(phat: &Distribution, q: &Distribution) -> Result<IndexSet, DistError> {
    ensure_same_domain(phat.len(), q.len())?;
    let members = phat
        .probs
        .iter()
        .zip(&q.probs)
        .enumerate()
        .filter(|(_, (a, b))| a < b)
        .map(|(i, _)| i + 1)
        .collect();
    Ok(IndexSet {
        n: phat.len(),
        members,
    })
}

/// Probability mass `p(S)`.
pub fn mass(p: &Distribution, set: &IndexSet) -> Result<f64, DistError> {
    let n = p.len();
    let mut total = 0.0;
    for &i in &set.members {
        if i == 0 || i > n {
            return Err(DistError::IndexOutOfRange { index: i, n });
        }
        total += p.probs[i - 1];
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Elementwise `(1 − β)·p + β·q`.
pub fn mix(p: &Distribution, q: &Distribution, beta: f64) -> Result<Distribution, DistError> {
    ensure_same_domain(p.len(), q.len())?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(DistError::BetaOutOfRange(beta));
    }
    let probs = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (1.0 - beta) * a + beta * b)
        .collect();
    Distribution::new(probs)
}

/// Empirical distribution `counts[i] / total`.
pub fn empirical(batch: &SampleBatch) -> Result<Distribution, DistError> {
    if batch.total == 0 {
        return Err(DistError::EmptyBatch);
    }
    let total = batch.total as f64;
    Distribution::new(batch.counts.iter().map(|&c| c as f64 / total).collect())
}

/// A `Poisson(λ)` variate; `λ = 0` (or negative) gives 0.
pub fn poisson_count(rng: &mut SeededRng, lambda: f64) -> u64 {
    assert!(lambda.is_finite(), "Poisson mean must be finite");
    if lambda <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(lambda).expect("finite positive Poisson mean");
    dist.sample(rng) as u64
}

/// O(1)-per-draw sampler built once per distribution.
///
/// The alias table covers only the support, so elements of probability 0
/// are never drawn.
#[derive(Clone, Debug)]
pub struct Sampler {
    n: usize,
    support: Vec<usize>,
    weights: Vec<f64>,
    table: WeightedAliasIndex<f64>,
}

impl Sampler {
    pub fn new(p: &Distribution) -> Self {
        let (support, weights): (Vec<usize>, Vec<f64>) = p
            .probs
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, &v)| (i + 1, v))
            .unzip();
        let table = WeightedAliasIndex::new(weights.clone())
            .expect("a distribution has positive total mass");
        Self {
            n: p.len(),
            support,
            weights,
            table,
        }
    }

    pub fn domain_size(&self) -> usize {
        self.n
    }

    /// One draw, as a 1-based index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.support[self.table.sample(rng)]
    }

    /// `count` i.i.d. draws as frequency counts.
    pub fn draw(&self, rng: &mut SeededRng, count: u64) -> SampleBatch {
        let mut batch = SampleBatch::zeros(self.n);
        for _ in 0..count {
            batch.add(self.sample(rng), 1);
        }
        batch
    }

    /// `Poisson(λ)` draws. For large `λ` the per-element counts are drawn
    /// directly as independent `Poisson(λ·p_i)` variates, which has the same
    /// law and costs O(support) instead of O(λ).
    pub fn draw_poissonized(&self, rng: &mut SeededRng, lambda: f64) -> SampleBatch {
        if lambda < self.support.len() as f64 {
            let k = poisson_count(rng, lambda);
            return self.draw(rng, k);
        }
        let mut batch = SampleBatch::zeros(self.n);
        for (&i, &w) in self.support.iter().zip(&self.weights) {
            let k = poisson_count(rng, lambda * w);
            if k > 0 {
                batch.add(i, k);
            }
        }
        batch
    }
}

/// `count` i.i.d. draws from `p` as frequency counts.
pub fn draw(p: &Distribution, rng: &mut SeededRng, count: u64) -> SampleBatch {
    Sampler::new(p).draw(rng, count)
}
