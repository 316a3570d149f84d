use super::standard::standard_identity_test;
use super::{check_eps, require, same_domain, Branch, TestReport, TesterError, Verdict};
use crate::dist::{mass, scheffe_set, tv_distance, Distribution};
use crate::oracle::SampleOracle;
use crate::rng::SeededRng;

/// Overall failure probability of the augmented identity tester.
pub const IDENTITY_DELTA: f64 = 0.1;

/// Samples for the Scheffé-set branch, `⌈64/(d − α)²⌉`.
pub fn scheffe_sample_size(gap: f64) -> u64 {
    (64.0 / (gap * gap)).ceil() as u64
}

/// Identity testing of `p` against a known `q` with a prediction `p̂` of `p`.
///
/// With `d = tv(q, p̂)`, a prediction that is far from `q` but (as claimed)
/// within `α` of `p` already shows `p ≠ q`: the mass of the Scheffé set of
/// `(p̂, q)` under `p` must then be far from its mass under `q`. If the
/// observed mass is close to `q`'s instead, the prediction was wrong and the
/// answer is [`Verdict::Inaccurate`]. When the gap `d − α` is too small for
/// this to beat the standard tester, the standard tester is used.
pub fn augmented_identity_test<P>(
    q: &Distribution,
    phat: &Distribution,
    p_src: &P,
    alpha: f64,
    eps: f64,
    rng: &mut SeededRng,
) -> Result<TestReport, TesterError>
where
    P: SampleOracle + ?Sized,
{
    let n = q.len();
    same_domain(n, phat.len())?;
    same_domain(n, p_src.domain_size())?;
    require(
        (0.0..=1.0).contains(&alpha),
        "alpha",
        alpha,
        "must lie in [0, 1]",
    )?;
    check_eps(eps)?;

    let d = tv_distance(q, phat)?;
    let gap = d - alpha;
    if gap <= 0.0 || 1.0 / (gap * gap) > (n as f64).sqrt() / (eps * eps) {
        let report = standard_identity_test(q, p_src, eps, IDENTITY_DELTA / 2.0, rng)?;
        return Ok(TestReport {
            branch: Branch::IdentityDelegated,
            ..report
        });
    }

    let s = scheffe_set(phat, q)?;
    let m = scheffe_sample_size(gap);
    let batch = p_src.draw(rng, m)?;
    let hits: u64 = s.members().iter().map(|&i| batch.count(i)).sum();
    let sigma = hits as f64 / m as f64;
    let verdict = if (mass(q, &s)? - sigma).abs() > gap / 4.0 {
        Verdict::Reject
    } else {
        Verdict::Inaccurate
    };
    Ok(TestReport {
        verdict,
        statistic: Some(sigma),
        samples_used: m,
        branch: Branch::IdentityScheffe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::DistributionOracle;

    /// Even elements `(1 + 2d)/n`, odd ones `(1 − 2d)/n`.
    fn tilted(n: usize, d: f64) -> Distribution {
        let probs = (1..=n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                (1.0 + s * 2.0 * d) / n as f64
            })
            .collect();
        Distribution::new(probs).unwrap()
    }

    #[test]
    fn exact_hint_delegates() {
        let q = Distribution::uniform(50);
        let r = augmented_identity_test(
            &q,
            &q,
            &DistributionOracle::new(&q),
            0.3,
            0.5,
            &mut SeededRng::new(1),
        )
        .unwrap();
        assert_eq!(r.branch, Branch::IdentityDelegated);
        assert_eq!(r.verdict, Verdict::Accept);
    }

    #[test]
    fn scheffe_branch_sample_count_and_verdicts() {
        let n = 1000;
        let q = Distribution::uniform(n);
        let phat = tilted(n, 0.4);
        let q_src = DistributionOracle::new(&q);
        let phat_src = DistributionOracle::new(&phat);
        let mut inaccurate = 0;
        let mut reject = 0;
        for s in 0..100 {
            let mut rng = SeededRng::new(s);
            let r = augmented_identity_test(&q, &phat, &q_src, 0.1, 0.5, &mut rng).unwrap();
            assert_eq!(r.branch, Branch::IdentityScheffe);
            assert_eq!(r.samples_used, scheffe_sample_size(0.3));
            inaccurate += (r.verdict == Verdict::Inaccurate) as u32;
            let r = augmented_identity_test(&q, &phat, &phat_src, 0.1, 0.3, &mut rng).unwrap();
            reject += (r.verdict == Verdict::Reject) as u32;
        }
        assert_eq!(scheffe_sample_size(0.3), 712);
        assert!(inaccurate >= 90, "inaccurate = {inaccurate}");
        assert!(reject >= 90, "reject = {reject}");
    }

    #[test]
    fn parameter_checks() {
        let q = Distribution::uniform(4);
        let src = DistributionOracle::new(&q);
        let mut rng = SeededRng::new(0);
        assert!(augmented_identity_test(&q, &q, &src, 1.5, 0.5, &mut rng).is_err());
        assert!(augmented_identity_test(&q, &q, &src, 0.1, 0.0, &mut rng).is_err());
        let wide = Distribution::uniform(5);
        assert!(matches!(
            augmented_identity_test(&q, &wide, &src, 0.1, 0.5, &mut rng),
            Err(TesterError::DomainMismatch { .. })
        ));
    }
}
