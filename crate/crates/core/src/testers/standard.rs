use rand::RngCore;
use rayon::prelude::*;

use super::{
    check_delta, check_eps, require, same_domain, Branch, TestReport, TesterError, Verdict,
};
use crate::dist::{Distribution, SampleBatch};
use crate::flatten::l2sq_exact;
use crate::l2::estimate_l2sq;
use crate::oracle::{DistributionOracle, SampleOracle};
use crate::rng::{child_seed, SeededRng};

/// Largest tolerated ratio between the two ℓ2-norm estimates.
const NORM_RATIO_LIMIT: f64 = 3.0;

/// `T = Σ (X_i − Y_i)² − X_i − Y_i`, unbiased for `m²‖p − q‖₂²` under
/// `Poisson(m)` sampling. May be negative.
pub fn t_statistic(x: &SampleBatch, y: &SampleBatch) -> Result<f64, TesterError> {
    same_domain(x.len(), y.len())?;
    let t: i128 = x
        .counts()
        .iter()
        .zip(y.counts())
        .map(|(&a, &b)| {
            let (a, b) = (a as i128, b as i128);
            (a - b) * (a - b) - a - b
        })
        .sum();
    Ok(t as f64)
}

/// Voting rounds `⌈18 ln(1/δ)⌉`.
pub fn voting_rounds(delta: f64) -> u64 {
    (18.0 * (1.0 / delta).ln()).ceil().max(1.0) as u64
}

/// Poisson mean per side and round, `⌈24·domain·√b/ε²⌉`.
pub fn round_sample_size(domain: usize, b: f64, eps: f64) -> u64 {
    (24.0 * domain as f64 * b.sqrt() / (eps * eps))
        .ceil()
        .max(1.0) as u64
}

/// A round votes Accept when `T ≤ m²ε²/(4·domain)`.
pub fn accept_threshold(m: u64, eps: f64, domain: usize) -> f64 {
    let m = m as f64;
    m * m * eps * eps / (4.0 * domain as f64)
}

pub(crate) struct SidedReport {
    pub report: TestReport,
    pub p_samples: u64,
}

/// Shared body of the closeness and identity testers. `lq_exact` replaces
/// the estimate of `‖q‖₂²` when `q` is known.
fn closeness_core<P, Q>(
    p_src: &P,
    q_src: &Q,
    eps: f64,
    delta: f64,
    b: f64,
    lq_exact: Option<f64>,
    rng: &mut SeededRng,
) -> Result<SidedReport, TesterError>
where
    P: SampleOracle + ?Sized,
    Q: SampleOracle + ?Sized,
{
    let domain = p_src.domain_size();
    same_domain(domain, q_src.domain_size())?;
    check_eps(eps)?;
    check_delta(delta)?;
    require(b > 0.0 && b.is_finite(), "b", b, "must be positive")?;

    let lp = estimate_l2sq(p_src, delta / 3.0, rng)?;
    let mut p_samples = lp.total_samples();
    let mut q_samples = 0;
    let lq = match lq_exact {
        Some(v) => v,
        None => {
            let est = estimate_l2sq(q_src, delta / 3.0, rng)?;
            q_samples += est.total_samples();
            est.value
        }
    };
    let ratio = if lq > 0.0 {
        lp.value / lq
    } else if lp.value > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    if !(1.0 / NORM_RATIO_LIMIT..=NORM_RATIO_LIMIT).contains(&ratio) {
        return Ok(SidedReport {
            report: TestReport {
                verdict: Verdict::Reject,
                statistic: Some(ratio),
                samples_used: p_samples + q_samples,
                branch: Branch::StandardPrecheck,
            },
            p_samples,
        });
    }

    let t = voting_rounds(delta);
    let m = round_sample_size(domain, b, eps);
    let threshold = accept_threshold(m, eps, domain);
    let base = rng.next_u64();
    let rounds = (0..t)
        .into_par_iter()
        .map(|k| {
            let mut r = SeededRng::new(child_seed(base, k));
            let x = p_src.draw_poissonized(&mut r, m as f64)?;
            let y = q_src.draw_poissonized(&mut r, m as f64)?;
            Ok((t_statistic(&x, &y)?, x.total(), y.total()))
        })
        .collect::<Result<Vec<_>, TesterError>>()?;

    let accepts = rounds.iter().filter(|(z, _, _)| *z <= threshold).count() as u64;
    p_samples += rounds.iter().map(|r| r.1).sum::<u64>();
    q_samples += rounds.iter().map(|r| r.2).sum::<u64>();
    let mut stats: Vec<f64> = rounds.iter().map(|r| r.0).collect();
    stats.sort_by(f64::total_cmp);
    let median = stats[stats.len() / 2];

    Ok(SidedReport {
        report: TestReport {
            verdict: if 2 * accepts >= t {
                Verdict::Accept
            } else {
                Verdict::Reject
            },
            statistic: Some(median),
            samples_used: p_samples + q_samples,
            branch: Branch::StandardVote,
        },
        p_samples,
    })
}

/// Tests `p = q` against `tv(p, q) ≥ ε` from samples of both, assuming
/// `‖p‖₂², ‖q‖₂² ≤ b`. Correct with probability `1 − δ`.
pub fn standard_closeness_test<P, Q>(
    p_src: &P,
    q_src: &Q,
    eps: f64,
    delta: f64,
    b: f64,
    rng: &mut SeededRng,
) -> Result<TestReport, TesterError>
where
    P: SampleOracle + ?Sized,
    Q: SampleOracle + ?Sized,
{
    Ok(closeness_core(p_src, q_src, eps, delta, b, None, rng)?.report)
}

/// Tests `p = q` for a known `q`: the closeness tester with exact draws
/// from `q` and `b = ‖q‖₂²`. `samples_used` counts samples of `p` only.
pub fn standard_identity_test<P>(
    q: &Distribution,
    p_src: &P,
    eps: f64,
    delta: f64,
    rng: &mut SeededRng,
) -> Result<TestReport, TesterError>
where
    P: SampleOracle + ?Sized,
{
    same_domain(q.len(), p_src.domain_size())?;
    let b = l2sq_exact(q);
    let q_src = DistributionOracle::new(q);
    let sided = closeness_core(p_src, &q_src, eps, delta, b, Some(b), rng)?;
    Ok(TestReport {
        samples_used: sided.p_samples,
        ..sided.report
    })
}
