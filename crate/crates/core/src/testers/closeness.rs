use super::standard::standard_closeness_test;
use super::{check_delta, require, same_domain, Branch, TestReport, TesterError, Verdict};
use crate::dist::{poisson_count, Distribution};
use crate::flatten::build_augmented_flattening;
use crate::l2::estimate_l2sq;
use crate::oracle::{FlattenedOracle, SampleOracle};
use crate::rng::SeededRng;

/// Failure probability of each ℓ2-norm estimate on the flattened domain.
const NORM_ESTIMATE_DELTA: f64 = 0.05;
/// `L_p` above this multiple of the flattening bound means the prediction is off.
const INACCURATE_FACTOR: f64 = 30.0;
/// `L_q` above this multiple of the flattening bound rules out `p = q`.
const NORM_REJECT_FACTOR: f64 = 90.0;
/// Flattening sample counts above this multiple of `s_f` are rejected.
const POISSON_OVERFLOW_FACTOR: f64 = 10.0;

/// `samples_used ≤ C·(n^{2/3}α^{1/3}/ε^{4/3} + √n/ε²)` for every run with the
/// default options.
pub const CLOSENESS_SAMPLE_CONSTANT: f64 = 1.2e6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosenessOptions {
    /// Failure probability handed to the standard tester on the flattened
    /// domain.
    pub inner_delta: f64,
}

impl Default for ClosenessOptions {
    fn default() -> Self {
        Self { inner_delta: 0.1 }
    }
}

fn effective_alpha(alpha: f64, n: usize) -> f64 {
    alpha.max(1.0 / n as f64)
}

/// `s_f = min(n^{2/3}α^{1/3}/ε^{4/3}, n)`.
fn flattening_samples(n: usize, alpha: f64, eps: f64) -> f64 {
    let n_f = n as f64;
    (n_f.powf(2.0 / 3.0) * alpha.cbrt() / eps.powf(4.0 / 3.0)).min(n_f)
}

/// `n^{2/3}α^{1/3}/ε^{4/3} + √n/ε²`, with `α = 0` read as `1/n`.
pub fn closeness_sample_budget(n: usize, alpha: f64, eps: f64) -> f64 {
    let a = effective_alpha(alpha, n);
    let n_f = n as f64;
    n_f.powf(2.0 / 3.0) * a.cbrt() / eps.powf(4.0 / 3.0) + n_f.sqrt() / (eps * eps)
}

/// Closeness testing of `p` and `q` with a prediction `p̂` of `p`.
///
/// Flattens both distributions with buckets from `p̂` and a Poissonized
/// number of samples of `p`, then runs the standard tester on the flattened
/// domain. If the flattened `p` still has a large ℓ2 norm, `p̂` was not
/// within `α` of `p` and the answer is [`Verdict::Inaccurate`].
///
/// `α = 0` is treated as `α = 1/n`.
pub fn augmented_closeness_test<P, Q>(
    phat: &Distribution,
    p_src: &P,
    q_src: &Q,
    alpha: f64,
    eps: f64,
    opts: ClosenessOptions,
    rng: &mut SeededRng,
) -> Result<TestReport, TesterError>
where
    P: SampleOracle + ?Sized,
    Q: SampleOracle + ?Sized,
{
    let n = phat.len();
    same_domain(n, p_src.domain_size())?;
    same_domain(n, q_src.domain_size())?;
    require(
        (0.0..=1.0).contains(&alpha),
        "alpha",
        alpha,
        "must lie in [0, 1]",
    )?;
    require(eps > 0.0 && eps < 1.0, "eps", eps, "must lie in (0, 1)")?;
    check_delta(opts.inner_delta)?;

    let alpha = effective_alpha(alpha, n);
    let s_f = flattening_samples(n, alpha, eps);
    let s_hat = poisson_count(rng, s_f);
    if s_hat as f64 > POISSON_OVERFLOW_FACTOR * s_f {
        return Ok(TestReport {
            verdict: Verdict::Reject,
            statistic: Some(s_hat as f64),
            samples_used: 0,
            branch: Branch::ClosenessPoissonOverflow,
        });
    }

    let freqs = p_src.draw(rng, s_hat)?;
    let flattening = build_augmented_flattening(phat, &freqs, 1.0 / n as f64)?;
    let p_flat = FlattenedOracle::new(p_src, &flattening)?;
    let q_flat = FlattenedOracle::new(q_src, &flattening)?;

    let bound = 2.0 * alpha / s_f + 4.0 / n as f64;
    let lp = estimate_l2sq(&p_flat, NORM_ESTIMATE_DELTA, rng)?;
    let lq = estimate_l2sq(&q_flat, NORM_ESTIMATE_DELTA, rng)?;
    let mut used = s_hat + lp.total_samples() + lq.total_samples();

    if lp.value > INACCURATE_FACTOR * bound {
        return Ok(TestReport {
            verdict: Verdict::Inaccurate,
            statistic: Some(lp.value),
            samples_used: used,
            branch: Branch::ClosenessInaccurate,
        });
    }
    if lq.value > NORM_REJECT_FACTOR * bound {
        return Ok(TestReport {
            verdict: Verdict::Reject,
            statistic: Some(lq.value),
            samples_used: used,
            branch: Branch::ClosenessNormReject,
        });
    }

    let inner = standard_closeness_test(
        &p_flat,
        &q_flat,
        eps,
        opts.inner_delta,
        NORM_REJECT_FACTOR * bound,
        rng,
    )?;
    used += inner.samples_used;
    Ok(TestReport {
        verdict: inner.verdict,
        statistic: inner.statistic,
        samples_used: used,
        branch: Branch::ClosenessDelegated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::DistributionOracle;

    #[test]
    fn flattening_sample_formula() {
        assert!((flattening_samples(1000, 1.0, 1.0 / 8.0) - 1000.0).abs() < 1e-9);
        // 1000^{2/3} · 0.001^{1/3} / 1 = 100 · 0.1 = 10.
        assert!((flattening_samples(1000, 0.001, 1.0 - 1e-15) - 10.0).abs() < 1e-9);
        assert_eq!(effective_alpha(0.0, 1000), 0.001);
    }

    #[test]
    fn wrong_point_mass_hint_is_inaccurate() {
        // p is a point mass away from the predicted one: only the ~s_f
        // flattening samples split it, leaving ‖p^F‖² ≈ 1/s_f ≫ 30·bound.
        let n = 10_000;
        let p = Distribution::point_mass(n, 2).unwrap();
        let phat = Distribution::point_mass(n, 1).unwrap();
        let src = DistributionOracle::new(&p);
        for s in 0..20 {
            let r = augmented_closeness_test(
                &phat,
                &src,
                &src,
                0.0,
                0.9,
                ClosenessOptions::default(),
                &mut SeededRng::new(s),
            )
            .unwrap();
            assert_eq!(r.verdict, Verdict::Inaccurate, "seed {s}");
            assert_eq!(r.branch, Branch::ClosenessInaccurate);
        }
    }

    #[test]
    fn exact_hint_same_distribution_accepts() {
        let n = 200;
        let p = Distribution::uniform(n);
        let src = DistributionOracle::new(&p);
        let accepts = (0..20)
            .filter(|&s| {
                augmented_closeness_test(
                    &p,
                    &src,
                    &src,
                    0.0,
                    0.5,
                    ClosenessOptions::default(),
                    &mut SeededRng::new(s),
                )
                .unwrap()
                .verdict
                    == Verdict::Accept
            })
            .count();
        assert!(accepts >= 18, "accepts = {accepts}");
    }

    #[test]
    fn parameter_checks() {
        let p = Distribution::uniform(10);
        let src = DistributionOracle::new(&p);
        let mut rng = SeededRng::new(0);
        let opts = ClosenessOptions::default();
        assert!(augmented_closeness_test(&p, &src, &src, -0.1, 0.5, opts, &mut rng).is_err());
        assert!(augmented_closeness_test(&p, &src, &src, 0.1, 1.0, opts, &mut rng).is_err());
        let bad = ClosenessOptions { inner_delta: 0.0 };
        assert!(augmented_closeness_test(&p, &src, &src, 0.1, 0.5, bad, &mut rng).is_err());
    }
}
