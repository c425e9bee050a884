//! Closed-form and exact probabilities for both protocols, the series
//! constants behind their asymptotic bounds, and the time/energy trade-off
//! in the tuning parameter `alpha`.
//!
//! Everything here is a pure function of its arguments and serves as the
//! oracle the simulator is checked against.

mod constants;
mod rounds;

pub use constants::{
    c_of_alpha, lemma1_sum, lemma2_limit, lemma2_sum, optimal_alpha, series_constants,
    AnalysisConstants, CostProfile, FLUCTUATION_BUDGET_LEMMA1, FLUCTUATION_BUDGET_LEMMA2, Q1_BOUND,
    Q2_BOUND,
};
pub use rounds::{
    exact_round_success_alg1, exact_round_success_alg1_collapsed, exact_round_success_alg2,
    expected_cost, j_star, p_round_alg1_formula, p_round_alg2_formula, round_success_profile,
    unique_broadcast_prob, ExpectedCost, RoundFormula, MAX_ALG1_DP_STATIONS, MAX_ALG2_DP_STATIONS,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("n = {n} exceeds the limit of {max} for this computation")]
    Size { n: u64, max: u64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
}
