//! The two election protocols and the engine that drives them.
//!
//! Both protocols run in rounds. Round `j` has a probabilistic phase of
//! `⌈α^j⌉` slots, where a station wakes in the `i`-th slot with probability
//! `2^-(k_start + i - 1)`, followed by a short deterministic phase in which the
//! outcome is settled and announced.
//!
//! * [`Protocol::Candidate`] (strong no-CD): a station that broadcasts alone
//!   hears itself and becomes a candidate. At the end of the round every
//!   station listens while candidates broadcast; a lone candidate is elected.
//! * [`Protocol::Witness`] (weak no-CD): awake stations flip a coin to send
//!   or listen. A listener that hears a lone sender becomes a witness for that
//!   slot. At the end of the round witnesses report the slot they heard; if
//!   exactly one witness reports, the station that sent in that slot is
//!   elected and then announces itself.

mod election;
mod rounds;
mod schedule;
mod station;

pub use election::{
    run_election, run_election_with_labels, run_reference_election, Election, RunMetrics,
    RunSummary,
};
pub use rounds::{run_candidate_round, run_witness_round, RoundOutcome, RoundReport};
pub use schedule::{
    round_length, slot_probability, HeadDraw, Intent, RoundPlan, RoundSchedule, SlotWakes,
    StationCoins, MAX_ROUND_SLOTS, MAX_WAKE_EXPONENT,
};
pub use station::{SlotSet, StationState};

use crate::channel::{ChannelError, ChannelModel};
use thiserror::Error;

/// Which election protocol to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Algorithm 1: candidates hear their own broadcast (strong no-CD).
    Candidate,
    /// Algorithm 2: witnesses vouch for lone senders (weak no-CD).
    Witness,
}

impl Protocol {
    pub fn model(self) -> ChannelModel {
        match self {
            Protocol::Candidate => ChannelModel::StrongNoCd,
            Protocol::Witness => ChannelModel::WeakNoCd,
        }
    }

    /// Deterministic slots appended to every round.
    pub fn overhead_slots(self) -> u64 {
        match self {
            Protocol::Candidate => 1,
            Protocol::Witness => 2,
        }
    }

    /// Short name used on the command line and in output files.
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Candidate => "alg1",
            Protocol::Witness => "alg2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "alg1" => Some(Protocol::Candidate),
            "alg2" => Some(Protocol::Witness),
            _ => None,
        }
    }

    /// Tuning parameter minimizing the expected-time constant.
    pub fn default_alpha(self) -> f64 {
        match self {
            Protocol::Candidate => 1.3361,
            Protocol::Witness => 1.3295,
        }
    }
}

/// Parameters of one election.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub protocol: Protocol,
    /// Round `j` has `⌈alpha^j⌉` probabilistic slots. Must exceed 1.
    pub alpha: f64,
    /// Exponent of the first slot's wake probability `2^-k_start`.
    pub k_start: u32,
    pub model: ChannelModel,
    pub max_rounds: u32,
}

impl ProtocolParams {
    pub const DEFAULT_MAX_ROUNDS: u32 = 64;

    pub fn new(protocol: Protocol, alpha: f64) -> Self {
        Self {
            protocol,
            alpha,
            k_start: 1,
            model: protocol.model(),
            max_rounds: Self::DEFAULT_MAX_ROUNDS,
        }
    }

    pub fn candidate(alpha: f64) -> Self {
        Self::new(Protocol::Candidate, alpha)
    }

    pub fn witness(alpha: f64) -> Self {
        Self::new(Protocol::Witness, alpha)
    }

    pub fn with_k_start(mut self, k_start: u32) -> Self {
        self.k_start = k_start;
        self
    }

    pub fn with_max_rounds(mut self, max_rounds: u32) -> Self {
        self.max_rounds = max_rounds;
        self
    }

    pub fn with_model(mut self, model: ChannelModel) -> Self {
        self.model = model;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(SimError::ConfigInvalid(format!(
                "alpha must be a finite number greater than 1, got {}",
                self.alpha
            )));
        }
        if self.k_start == 0 {
            return Err(SimError::ConfigInvalid("k_start must be at least 1".into()));
        }
        if self.max_rounds == 0 {
            return Err(SimError::ConfigInvalid(
                "max_rounds must be at least 1".into(),
            ));
        }
        if self.model != self.protocol.model() {
            return Err(SimError::ConfigInvalid(format!(
                "protocol {} runs on the {:?} channel, not {:?}",
                self.protocol.name(),
                self.protocol.model(),
                self.model
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    /// No leader after `max_rounds` rounds (or the next round would exceed the
    /// slot budget). The partial run is attached.
    #[error("no leader elected within {} rounds", metrics.rounds_used)]
    RoundCapExceeded { metrics: Box<RunMetrics> },
    #[error("round {round} would exceed the slot budget of {MAX_ROUND_SLOTS} slots")]
    Overflow { round: u32 },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("safety violation: {0}")]
    SafetyViolation(String),
}
