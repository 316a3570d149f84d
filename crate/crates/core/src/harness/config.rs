use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSpec {
    HardCloseness {
        n: usize,
    },
    /// `.dist` files; `hint` defaults to `p`. Relative paths are resolved
    /// against the configuration file's directory.
    Files {
        p: PathBuf,
        q: PathBuf,
        #[serde(default)]
        hint: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Standard,
    Augmented,
    Crs15,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Standard => "standard",
            Algorithm::Augmented => "augmented",
            Algorithm::Crs15 => "crs15",
        }
    }

    /// Stream id used in seed derivation.
    pub(crate) fn id(self) -> u64 {
        match self {
            Algorithm::Standard => 0,
            Algorithm::Augmented => 1,
            Algorithm::Crs15 => 2,
        }
    }
}

fn default_trials() -> usize {
    100
}

fn default_betas() -> Vec<f64> {
    vec![0.0]
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Standard, Algorithm::Augmented, Algorithm::Crs15]
}

fn default_drop_fraction() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub instance: InstanceSpec,
    /// Samples per side fed to the statistic, strictly ascending.
    pub budgets: Vec<u64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Interpolation towards the uniform distribution for [`run_sweep`](super::run_sweep).
    #[serde(default)]
    pub beta: f64,
    /// Interpolation values for [`beta_sweep`](super::beta_sweep).
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    pub eps: f64,
    pub alpha: f64,
    pub seed: u64,
    /// Fraction of heavy elements removed from the point-wise baseline's
    /// hint on the hard instance.
    #[serde(default = "default_drop_fraction")]
    pub crs_drop_fraction: f64,
    /// Budget for [`beta_sweep`](super::beta_sweep); defaults to the last
    /// entry of `budgets`.
    #[serde(default)]
    pub beta_budget: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: SweepConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a configuration file, resolving relative
    /// instance paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let mut cfg = Self::from_json(&std::fs::read_to_string(path)?)?;
        if let InstanceSpec::Files { p, q, hint } = &mut cfg.instance {
            let base = path.parent().unwrap_or_else(|| Path::new(""));
            for f in [Some(p), Some(q), hint.as_mut()].into_iter().flatten() {
                if f.is_relative() {
                    *f = base.join(&*f);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: &str| Err(HarnessError::Config(msg.to_owned()));
        if self.budgets.is_empty() {
            return fail("budgets must not be empty");
        }
        if self.budgets[0] == 0 || self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return fail("budgets must be positive and strictly ascending");
        }
        if self.trials < 2 {
            return fail("trials must be at least 2");
        }
        // Seed keys reserve 8 streams per trial within each budget.
        if self.trials > 125_000 {
            return fail("trials must be at most 125000");
        }
        if self.algorithms.is_empty() {
            return fail("algorithms must not be empty");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return fail("eps must lie in (0, 1)");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return fail("alpha must lie in (0, 1]");
        }
        if self.betas.is_empty() {
            return fail("betas must not be empty");
        }
        if std::iter::once(&self.beta)
            .chain(&self.betas)
            .any(|b| !(0.0..=1.0).contains(b))
        {
            return fail("interpolation values must lie in [0, 1]");
        }
        if !(self.crs_drop_fraction > 0.0 && self.crs_drop_fraction < 1.0) {
            return fail("crs_drop_fraction must lie in (0, 1)");
        }
        if self.beta_budget == Some(0) {
            return fail("beta_budget must be positive");
        }
        Ok(())
    }

    pub fn beta_budget(&self) -> u64 {
        self.beta_budget
            .unwrap_or(*self.budgets.last().expect("validated non-empty"))
    }
}
