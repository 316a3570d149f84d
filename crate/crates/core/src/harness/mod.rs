//! Experiment runner: statistic histograms over sample budgets and
//! prediction qualities, scored by the best single threshold.

mod config;
mod separation;
mod sweep;

use thiserror::Error;

pub use config::{Algorithm, InstanceSpec, SweepConfig};
pub use separation::{separation_error, Separation};
pub use sweep::{
    beta_sweep, resolve_instance, run_sweep, write_beta_csv, write_summary_csv, write_trials_csv,
    BetaRow, Case, ResolvedInstance, SummaryRow, SweepOutput, TrialRecord,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error("statistic vector is empty")]
    EmptyInput,
    #[error(transparent)]
    Format(#[from] crate::io::FormatError),
    #[error(transparent)]
    Instance(#[from] crate::instances::InstanceError),
    #[error(transparent)]
    Dist(#[from] crate::dist::DistError),
    #[error(transparent)]
    Flatten(#[from] crate::flatten::FlattenError),
    #[error(transparent)]
    Tester(#[from] crate::testers::TesterError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}
