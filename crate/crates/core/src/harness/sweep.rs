//! Grids of trial batches over `(n, alpha)`, each paired with the analytic
//! predictions.

use super::trials::{run_trials, TrialConfig, TrialStats};
use super::HarnessError;
use crate::analysis::{c_of_alpha, expected_cost, j_star, ExpectedCost, MAX_ALG2_DP_STATIONS};
use crate::analysis::{Q1_BOUND, Q2_BOUND};
use crate::numeric::combine;
use crate::protocol::{Protocol, ProtocolParams};

/// Measured per-round success against the per-round bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundCheck {
    pub round: u32,
    pub attempts: u64,
    pub frequency: f64,
    /// `q - 3σ` with `σ = sqrt(q(1 - q) / attempts)`.
    pub lower: f64,
}

impl RoundCheck {
    pub fn holds(&self) -> bool {
        self.frequency >= self.lower
    }
}

/// One cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub protocol: Protocol,
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    pub stats: TrialStats,
    pub j_star: u32,
    /// Per-round success bound used for the predictions.
    pub q: f64,
    pub c: f64,
    /// `c·log2 n`, the predicted ceiling on the expected probabilistic slots.
    pub slot_bound: f64,
    /// `2·log_alpha log2 n` for the strong-model protocol, `2.5·…` for the
    /// weak one: the leading term of the busiest station's awake slots.
    pub awake_bound: f64,
    /// `j* + 1/q + 1`, a loose reference for the mean number of rounds.
    pub rounds_reference: f64,
    /// Exact expectations where the per-round dynamic program is
    /// available.
    pub exact: Option<ExpectedCost>,
    /// Rounds after `j*` that at least one trial reached.
    pub round_checks: Vec<RoundCheck>,
}

impl SweepRow {
    pub fn slot_bound_holds(&self) -> bool {
        self.stats.probabilistic_slots.mean <= self.slot_bound
    }

    pub fn round_checks_hold(&self) -> bool {
        self.round_checks.iter().all(RoundCheck::holds)
    }

    /// `mean_awake_max / awake_bound`.
    pub fn awake_ratio(&self) -> f64 {
        self.stats.awake_max.mean / self.awake_bound
    }
}

fn reference_q(protocol: Protocol) -> f64 {
    match protocol {
        Protocol::Candidate => Q1_BOUND,
        Protocol::Witness => Q2_BOUND,
    }
}

fn awake_factor(protocol: Protocol) -> f64 {
    match protocol {
        Protocol::Candidate => 2.0,
        Protocol::Witness => 2.5,
    }
}

/// Runs `trials` elections for every pair in `n_values × alpha_values`
/// (n-major order). Cell `i` uses master seed `combine(seed, i)`.
///
/// Every `alpha` is checked against the domain of the cost constant before
/// any trial runs.
pub fn sweep(
    n_values: &[usize],
    alpha_values: &[f64],
    protocol: Protocol,
    trials: u64,
    seed: u64,
) -> Result<Vec<SweepRow>, HarnessError> {
    sweep_with(
        n_values,
        alpha_values,
        ProtocolParams::new(protocol, protocol.default_alpha()),
        trials,
        seed,
    )
}

/// Like [`sweep`], taking `k_start`, the round cap and the channel model
/// from `base`; its `alpha` is replaced by each grid value.
pub fn sweep_with(
    n_values: &[usize],
    alpha_values: &[f64],
    base: ProtocolParams,
    trials: u64,
    seed: u64,
) -> Result<Vec<SweepRow>, HarnessError> {
    let protocol = base.protocol;
    let q = reference_q(protocol);
    for &alpha in alpha_values {
        c_of_alpha(q, alpha)?;
    }
    for &n in n_values {
        if n < 2 {
            return Err(HarnessError::Precondition(format!(
                "every n must be at least 2, got {n}"
            )));
        }
    }

    let cells = n_values
        .iter()
        .flat_map(|&n| alpha_values.iter().map(move |&a| (n, a)));
    let mut rows = Vec::new();
    for (idx, (n, alpha)) in cells.enumerate() {
        let params = ProtocolParams { alpha, ..base };
        let cell_seed = combine(seed, idx as u64);
        let stats = run_trials(&TrialConfig::new(params, n, trials, cell_seed))?;
        let c = c_of_alpha(q, alpha)?;
        let log_n = (n as f64).log2();
        let js = j_star(n as u64, alpha);
        let exact = match protocol {
            Protocol::Witness if n as u64 > MAX_ALG2_DP_STATIONS => None,
            _ => Some(expected_cost(
                protocol,
                n as u64,
                alpha,
                params.k_start,
                params.max_rounds,
            )?),
        };
        let round_checks = stats
            .per_round_attempts
            .iter()
            .zip(&stats.per_round_success_freq)
            .enumerate()
            .map(|(i, (&attempts, &frequency))| (i as u32 + 1, attempts, frequency))
            .filter(|&(round, attempts, _)| round > js && attempts > 0)
            .map(|(round, attempts, frequency)| RoundCheck {
                round,
                attempts,
                frequency,
                lower: q - 3.0 * (q * (1.0 - q) / attempts as f64).sqrt(),
            })
            .collect();
        rows.push(SweepRow {
            protocol,
            n,
            alpha,
            seed: cell_seed,
            stats,
            j_star: js,
            q,
            c,
            slot_bound: c * log_n,
            awake_bound: awake_factor(protocol) * log_n.log(alpha),
            rounds_reference: js as f64 + 1.0 / q + 1.0,
            exact,
            round_checks,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::AnalysisError;

    #[test]
    fn alpha_outside_domain() {
        let r = sweep(&[16], &[1.5, 2.8], Protocol::Candidate, 10, 0);
        assert!(matches!(
            r,
            Err(HarnessError::Analysis(AnalysisError::Domain(_)))
        ));
    }

    #[test]
    fn grid_order_and_predictions() {
        let rows = sweep(&[4, 64], &[1.5, 2.0], Protocol::Candidate, 50, 3).unwrap();
        let cells: Vec<_> = rows.iter().map(|r| (r.n, r.alpha)).collect();
        assert_eq!(cells, [(4, 1.5), (4, 2.0), (64, 1.5), (64, 2.0)]);
        let r = &rows[3];
        assert_eq!(r.j_star, 3);
        assert!((r.slot_bound - r.c * 6.0).abs() < 1e-12);
        assert!((r.awake_bound - 2.0 * 6f64.log2()).abs() < 1e-12);
        assert!(r.exact.is_some());
        assert_eq!(r.stats.trials, 50);
    }

    #[test]
    fn witness_exact_only_when_small() {
        let rows = sweep(&[4, 16], &[1.5], Protocol::Witness, 20, 1).unwrap();
        assert!(rows[0].exact.is_some());
        assert!(rows[1].exact.is_none());
    }
}
