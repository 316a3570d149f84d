//! Sample access to unknown distributions.
//!
//! Testers only see distributions through a [`SampleOracle`]. The in-memory
//! [`DistributionOracle`] backs every experiment; [`FlattenedOracle`] turns
//! samples of `p` into samples of `p^F`.

use thiserror::Error;

use crate::dist::{poisson_count, Distribution, SampleBatch, Sampler};
use crate::flatten::{flatten_batch, FlattenError, Flattening};
use crate::rng::SeededRng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("sample source exhausted: requested {requested}, {available} left")]
    Exhausted { requested: u64, available: u64 },
    #[error(transparent)]
    Flatten(#[from] FlattenError),
    #[error("sample source failed: {0}")]
    Failed(String),
}

pub trait SampleOracle: Sync {
    fn domain_size(&self) -> usize;

    /// `count` i.i.d. samples as frequency counts.
    fn draw(&self, rng: &mut SeededRng, count: u64) -> Result<SampleBatch, OracleError>;

    /// `Poisson(λ)` samples, so the per-element counts are independent.
    fn draw_poissonized(
        &self,
        rng: &mut SeededRng,
        lambda: f64,
    ) -> Result<SampleBatch, OracleError> {
        let count = poisson_count(rng, lambda);
        self.draw(rng, count)
    }
}

impl<O: SampleOracle + ?Sized> SampleOracle for &O {
    fn domain_size(&self) -> usize {
        (**self).domain_size()
    }

    fn draw(&self, rng: &mut SeededRng, count: u64) -> Result<SampleBatch, OracleError> {
        (**self).draw(rng, count)
    }

    fn draw_poissonized(
        &self,
        rng: &mut SeededRng,
        lambda: f64,
    ) -> Result<SampleBatch, OracleError> {
        (**self).draw_poissonized(rng, lambda)
    }
}

/// Samples from a known distribution.
#[derive(Clone, Debug)]
pub struct DistributionOracle {
    sampler: Sampler,
}

impl DistributionOracle {
    pub fn new(p: &Distribution) -> Self {
        Self {
            sampler: Sampler::new(p),
        }
    }
}

impl SampleOracle for DistributionOracle {
    fn domain_size(&self) -> usize {
        self.sampler.domain_size()
    }

    fn draw(&self, rng: &mut SeededRng, count: u64) -> Result<SampleBatch, OracleError> {
        Ok(self.sampler.draw(rng, count))
    }

    fn draw_poissonized(
        &self,
        rng: &mut SeededRng,
        lambda: f64,
    ) -> Result<SampleBatch, OracleError> {
        Ok(self.sampler.draw_poissonized(rng, lambda))
    }
}

/// Samples of `p^F` obtained from samples of `p` and a bucket choice.
pub struct FlattenedOracle<'a, O: ?Sized> {
    inner: &'a O,
    flattening: &'a Flattening,
}

impl<'a, O: SampleOracle + ?Sized> FlattenedOracle<'a, O> {
    pub fn new(inner: &'a O, flattening: &'a Flattening) -> Result<Self, OracleError> {
        if inner.domain_size() != flattening.n() {
            return Err(FlattenError::DomainMismatch {
                flattening: flattening.n(),
                input: inner.domain_size(),
            }
            .into());
        }
        Ok(Self { inner, flattening })
    }
}

impl<O: SampleOracle + ?Sized> SampleOracle for FlattenedOracle<'_, O> {
    fn domain_size(&self) -> usize {
        self.flattening.flat_size()
    }

    fn draw(&self, rng: &mut SeededRng, count: u64) -> Result<SampleBatch, OracleError> {
        let batch = self.inner.draw(rng, count)?;
        Ok(flatten_batch(self.flattening, &batch, rng)?)
    }

    // Bucket assignment is a thinning, so a Poissonized batch of p maps to a
    // Poissonized batch of p^F.
    fn draw_poissonized(
        &self,
        rng: &mut SeededRng,
        lambda: f64,
    ) -> Result<SampleBatch, OracleError> {
        let batch = self.inner.draw_poissonized(rng, lambda)?;
        Ok(flatten_batch(self.flattening, &batch, rng)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{empirical, tv_distance};
    use crate::flatten::flatten_distribution;

    #[test]
    fn flattened_oracle_matches_flattened_distribution() {
        let p = Distribution::new(vec![0.5, 0.3, 0.2]).unwrap();
        let f = Flattening::from_buckets(vec![5, 3, 1]).unwrap();
        let base = DistributionOracle::new(&p);
        let oracle = FlattenedOracle::new(&base, &f).unwrap();
        assert_eq!(oracle.domain_size(), 9);

        let mut rng = SeededRng::new(3);
        let batch = oracle.draw(&mut rng, 200_000).unwrap();
        assert_eq!(batch.total(), 200_000);
        let pf = flatten_distribution(&f, &p).unwrap();
        assert!(tv_distance(&empirical(&batch).unwrap(), &pf).unwrap() < 0.01);

        let batch = oracle.draw_poissonized(&mut rng, 200_000.0).unwrap();
        assert!(tv_distance(&empirical(&batch).unwrap(), &pf).unwrap() < 0.01);
    }

    #[test]
    fn flattened_oracle_checks_domain() {
        let base = DistributionOracle::new(&Distribution::uniform(3));
        let f = Flattening::identity(4);
        assert!(matches!(
            FlattenedOracle::new(&base, &f),
            Err(OracleError::Flatten(FlattenError::DomainMismatch { .. }))
        ));
    }
}
