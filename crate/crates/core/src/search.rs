//! Automatic choice of the accuracy level `α` for an augmented tester.
//!
//! The search runs the tester with budgets `s_min, 2·s_min, 4·s_min, …`,
//! each time at the largest `α` that fits the budget, and stops at the first
//! conclusive answer. After `t = ⌈log₂(s_max/s_min)⌉` inconclusive rounds
//! the standard tester decides.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::Distribution;
use crate::l2::estimate_l2sq;
use crate::oracle::SampleOracle;
use crate::rng::SeededRng;
use crate::testers::{
    augmented_closeness_test, closeness_sample_budget, standard_closeness_test, ClosenessOptions,
    TestReport, TesterError, Verdict,
};

/// Confidence at which budgets are compared.
pub const BUDGET_DELTA: f64 = 1.0 / 3.0;
/// Absolute precision of the bisection on `α`.
pub const ALPHA_PRECISION: f64 = 1e-6;
/// Points of the `α` grid used to find `s_min` and `s_max`.
const GRID_POINTS: usize = 1001;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("budget {budget} is below the minimum {minimum}")]
    BudgetTooSmall { budget: u64, minimum: u64 },
    #[error("delta' = {0} outside (0, 1/2)")]
    DeltaOutOfRange(f64),
    #[error("sample complexity is infinite on the whole alpha grid")]
    UnboundedComplexity,
    #[error("standard tester returned an inconclusive verdict")]
    StandardInconclusive,
    #[error(transparent)]
    Tester(#[from] TesterError),
}

type BudgetFn = dyn Fn(f64, f64) -> u64 + Send + Sync;

/// `f(α, δ)`: samples an augmented tester needs at accuracy level `α` and
/// failure probability `δ`. Must be non-decreasing in `α`. `u64::MAX`
/// stands for an infinite budget.
pub struct SampleComplexityFn {
    f: Box<BudgetFn>,
}

impl SampleComplexityFn {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> u64 + Send + Sync + 'static,
    {
        Self { f: Box::new(f) }
    }

    /// `⌈C·(n^{2/3}α^{1/3}/ε^{4/3} + √n/ε²)·ln(1/δ)⌉` with the closeness
    /// tester's sample constant.
    pub fn closeness(n: usize, eps: f64) -> Self {
        let c = crate::testers::CLOSENESS_SAMPLE_CONSTANT;
        Self::new(move |alpha, delta| {
            (c * closeness_sample_budget(n, alpha, eps) * (1.0 / delta).ln()).ceil() as u64
        })
    }

    pub fn eval(&self, alpha: f64, delta: f64) -> u64 {
        (self.f)(alpha, delta)
    }

    /// True when `f(·, δ)` is non-decreasing on an evenly spaced grid.
    pub fn check_monotone(&self, delta: f64, points: usize) -> bool {
        let values: Vec<u64> = grid(points).map(|a| self.eval(a, delta)).collect();
        values.windows(2).all(|w| w[0] <= w[1])
    }

    /// `(s_min, s_max)` over the grid at `δ = 1/3`, ignoring infinite values.
    pub fn extremes(&self) -> Result<(u64, u64), SearchError> {
        let finite = grid(GRID_POINTS)
            .map(|a| self.eval(a, BUDGET_DELTA))
            .filter(|&v| v != u64::MAX);
        let (lo, hi) = finite.fold((u64::MAX, 0), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi == 0 && lo == u64::MAX {
            return Err(SearchError::UnboundedComplexity);
        }
        Ok((lo.max(1), hi.max(1)))
    }
}

fn grid(points: usize) -> impl Iterator<Item = f64> {
    let last = (points.max(2) - 1) as f64;
    (0..points.max(2)).map(move |k| k as f64 / last)
}

/// Largest `α ∈ [0, 1]` with `f(α, δ) ≤ budget`, found by bisection to
/// [`ALPHA_PRECISION`] and rounded down.
pub fn inverse_budget(f: &SampleComplexityFn, budget: u64, delta: f64) -> Result<f64, SearchError> {
    let minimum = f.eval(0.0, delta);
    if budget < minimum {
        return Err(SearchError::BudgetTooSmall { budget, minimum });
    }
    if f.eval(1.0, delta) <= budget {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > ALPHA_PRECISION {
        let mid = 0.5 * (lo + hi);
        if f.eval(mid, delta) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub verdict: Verdict,
    /// Tester invocations, including the final standard round if reached.
    pub rounds: u64,
    pub alphas: Vec<f64>,
    pub total_samples: u64,
}

impl SearchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Number of augmented rounds `t = ⌈log₂(s_max/s_min)⌉`.
pub fn augmented_rounds(s_min: u64, s_max: u64) -> u64 {
    if s_max <= s_min {
        return 0;
    }
    (s_max as f64 / s_min as f64).log2().ceil() as u64
}

/// Runs `tester(α_i, δ)` for `i = 0..t` with `δ = δ′/(t + 1)` and
/// `α_i` the largest level affordable with `2^i·s_min` samples, returning
/// the first conclusive verdict. Falls back to `standard(δ)`.
///
/// Budgets and `α_i` are computed at `δ = 1/3`; the per-round `δ` is only
/// passed to the testers.
pub fn search_test<T, S>(
    mut tester: T,
    f: &SampleComplexityFn,
    mut standard: S,
    delta_prime: f64,
) -> Result<SearchReport, SearchError>
where
    T: FnMut(f64, f64) -> Result<TestReport, TesterError>,
    S: FnMut(f64) -> Result<TestReport, TesterError>,
{
    if !(delta_prime > 0.0 && delta_prime < 0.5) {
        return Err(SearchError::DeltaOutOfRange(delta_prime));
    }
    let (s_min, s_max) = f.extremes()?;
    let t = augmented_rounds(s_min, s_max);
    let delta = delta_prime / (t + 1) as f64;

    let mut alphas = Vec::with_capacity(t as usize);
    let mut total = 0u64;
    for i in 0..t {
        let budget = s_min.saturating_mul(1u64.checked_shl(i as u32).unwrap_or(u64::MAX));
        let alpha = inverse_budget(f, budget, BUDGET_DELTA)?;
        alphas.push(alpha);
        let report = tester(alpha, delta)?;
        total = total.saturating_add(report.samples_used);
        if report.verdict != Verdict::Inaccurate {
            return Ok(SearchReport {
                verdict: report.verdict,
                rounds: i + 1,
                alphas,
                total_samples: total,
            });
        }
    }

    let report = standard(delta)?;
    if report.verdict == Verdict::Inaccurate {
        return Err(SearchError::StandardInconclusive);
    }
    Ok(SearchReport {
        verdict: report.verdict,
        rounds: t + 1,
        alphas,
        total_samples: total.saturating_add(report.samples_used),
    })
}

/// [`search_test`] for closeness with prediction `p̂` of `p`.
///
/// Rounds run the augmented closeness tester with inner failure
/// probability `min(0.1, δ)`. The fallback estimates both ℓ2 norms at
/// `δ/3` and runs the standard tester with `b = 2·max(L_p, L_q)`, clamped to
/// `[1/n, 1]`.
pub fn closeness_search<P, Q>(
    phat: &Distribution,
    p_src: &P,
    q_src: &Q,
    eps: f64,
    delta_prime: f64,
    rng: &mut SeededRng,
) -> Result<SearchReport, SearchError>
where
    P: SampleOracle + ?Sized,
    Q: SampleOracle + ?Sized,
{
    let n = phat.len();
    let f = SampleComplexityFn::closeness(n, eps);
    let mut round_rng = rng.child(1);
    let mut standard_rng = rng.child(2);
    search_test(
        |alpha, delta| {
            let opts = ClosenessOptions {
                inner_delta: delta.min(0.1),
            };
            augmented_closeness_test(phat, p_src, q_src, alpha, eps, opts, &mut round_rng)
        },
        &f,
        |delta| {
            let rng = &mut standard_rng;
            let lp = estimate_l2sq(p_src, delta / 3.0, rng)?;
            let lq = estimate_l2sq(q_src, delta / 3.0, rng)?;
            let b = (2.0 * lp.value.max(lq.value)).clamp(1.0 / n as f64, 1.0);
            let report = standard_closeness_test(p_src, q_src, eps, delta / 3.0, b, rng)?;
            Ok(TestReport {
                samples_used: report.samples_used + lp.total_samples() + lq.total_samples(),
                ..report
            })
        },
        delta_prime,
    )
}
