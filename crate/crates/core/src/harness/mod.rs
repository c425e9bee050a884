//! Monte Carlo runs of the protocols: repeated trials with aggregated
//! statistics, parameter sweeps, and a check of first-success dominance.

mod dominance;
mod sweep;
mod trials;

pub use dominance::{dominance_check, DominanceReport};
pub use sweep::{sweep, sweep_with, RoundCheck, SweepRow};
pub use trials::{
    run_trial_records, run_trials, trial_seed, Estimate, TrialConfig, TrialRecord, TrialStats,
    WORKERS_ENV,
};

use crate::analysis::AnalysisError;
use crate::protocol::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("precondition violated: {0}")]
    Precondition(String),
}
