//! Closeness and identity testers, with and without a prediction.
//!
//! Every tester returns a [`TestReport`]; the augmented testers may answer
//! [`Verdict::Inaccurate`] when the prediction is farther from the sampled
//! distribution than the suggested accuracy level.

mod closeness;
mod crs;
mod identity;
mod standard;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::DistError;
use crate::flatten::FlattenError;
use crate::oracle::OracleError;

pub use closeness::{
    augmented_closeness_test, closeness_sample_budget, ClosenessOptions, CLOSENESS_SAMPLE_CONSTANT,
};
pub use crs::crs15_test;
pub use identity::{augmented_identity_test, scheffe_sample_size, IDENTITY_DELTA};
pub use standard::{
    accept_threshold, round_sample_size, standard_closeness_test, standard_identity_test,
    t_statistic, voting_rounds,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
    Inaccurate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
            Verdict::Inaccurate => "inaccurate",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which exit of which tester produced a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// The ℓ2-norm estimates of the two sides differ by more than 3×.
    StandardPrecheck,
    /// Majority vote over the `T` statistic rounds.
    StandardVote,
    /// Augmented identity tester handed over to the standard tester.
    IdentityDelegated,
    /// Augmented identity tester decided from the Scheffé-set mass.
    IdentityScheffe,
    /// Too many flattening samples were requested.
    ClosenessPoissonOverflow,
    /// The flattened `p` still has a large ℓ2 norm.
    ClosenessInaccurate,
    /// The flattened `q` has a large ℓ2 norm.
    ClosenessNormReject,
    /// Augmented closeness tester ran the standard tester on flattened data.
    ClosenessDelegated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub verdict: Verdict,
    /// Median `T` for the vote branch, the estimate ratio `L_p / L_q` for the
    /// pre-check, `σ` for the Scheffé branch and `L_p` / `L_q` for the
    /// corresponding closeness exits.
    pub statistic: Option<f64>,
    pub samples_used: u64,
    pub branch: Branch,
}

impl TestReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TesterError {
    #[error("domain mismatch: {left} vs {right}")]
    DomainMismatch { left: usize, right: usize },
    #[error("parameter {name} = {value} {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Flatten(#[from] FlattenError),
}

pub(crate) fn require(
    ok: bool,
    name: &'static str,
    value: f64,
    requirement: &'static str,
) -> Result<(), TesterError> {
    if ok {
        Ok(())
    } else {
        Err(TesterError::InvalidParameter {
            name,
            value,
            requirement,
        })
    }
}

pub(crate) fn same_domain(left: usize, right: usize) -> Result<(), TesterError> {
    if left != right {
        return Err(TesterError::DomainMismatch { left, right });
    }
    Ok(())
}

pub(crate) fn check_eps(eps: f64) -> Result<(), TesterError> {
    require(eps > 0.0 && eps <= 1.0, "eps", eps, "must lie in (0, 1]")
}

pub(crate) fn check_delta(delta: f64) -> Result<(), TesterError> {
    require(
        delta > 0.0 && delta < 1.0,
        "delta",
        delta,
        "must lie in (0, 1)",
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_json_shape() {
        let r = TestReport {
            verdict: Verdict::Inaccurate,
            statistic: Some(0.25),
            samples_used: 712,
            branch: Branch::IdentityScheffe,
        };
        assert_eq!(
            r.to_json_line(),
            r#"{"verdict":"inaccurate","statistic":0.25,"samples_used":712,"branch":"identity_scheffe"}"#
        );
        let back: TestReport = serde_json::from_str(&r.to_json_line()).unwrap();
        assert_eq!(back, r);
    }
}
