//! Per-round election probabilities: the closed-form model quantities and
//! exact dynamic programs for the true events.

use super::AnalysisError;
use crate::numeric::guarded_ceil;
use crate::protocol::{round_length, Protocol};

/// Largest network handled by [`exact_round_success_alg1`].
pub const MAX_ALG1_DP_STATIONS: u64 = 64;
/// Largest network handled by [`exact_round_success_alg2`].
pub const MAX_ALG2_DP_STATIONS: u64 = 8;

// Past slot log2(n), once n * 2^-k drops below this, the remaining slots of a
// round cannot change any result at double precision.
const NEGLIGIBLE_WAKE_MASS: f64 = 1.0 / (1u64 << 60) as f64;

/// `⌈log_alpha(log2 n)⌉`, the round after which the per-round success
/// probability settles.
///
/// # Panics
///
/// If `n < 2` or `alpha <= 1`.
pub fn j_star(n: u64, alpha: f64) -> u32 {
    assert!(n >= 2, "j_star needs n >= 2");
    assert!(alpha > 1.0, "alpha must exceed 1");
    let v = guarded_ceil((n as f64).log2().ln() / alpha.ln());
    v.max(0.0) as u32
}

/// Probability that exactly one of `n` stations wakes in a slot with wake
/// probability `2^-k`: `(n / 2^k)(1 - 2^-k)^(n-1)`.
pub fn unique_broadcast_prob(n: u64, k: u32) -> f64 {
    assert!(n >= 1 && k >= 1);
    let p = (-(k as f64)).exp2();
    let ln = (n as f64).ln() + p.ln() + (n - 1) as f64 * (-p).ln_1p();
    ln.exp()
}

/// Model quantities for one round: `p` is the probability that exactly one
/// slot has a unique broadcaster, `s` that no slot has one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundFormula {
    pub p: f64,
    pub s: f64,
}

fn check_round(n: u64, j: u32, alpha: f64, k_start: u32) -> Result<(), AnalysisError> {
    if n < 2 {
        return Err(AnalysisError::Precondition(format!(
            "n must be at least 2, got {n}"
        )));
    }
    if j < 1 {
        return Err(AnalysisError::Precondition(
            "rounds are numbered from 1".into(),
        ));
    }
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(AnalysisError::Precondition(format!(
            "alpha must exceed 1, got {alpha}"
        )));
    }
    if k_start < 1 {
        return Err(AnalysisError::Precondition(
            "k_start must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Wake exponents `k_start, k_start + 1, ...` of round `j`, cut where the
/// remaining slots no longer matter for `n` stations.
fn slot_exponents(n: u64, j: u32, alpha: f64, k_start: u32) -> impl Iterator<Item = u32> {
    let length = guarded_ceil(alpha.powf(j as f64));
    let log2n = (n as f64).log2();
    (0u32..)
        .take_while(move |&i| (i as f64) < length)
        .map(move |i| k_start + i)
        .take_while(move |&k| {
            let mass = n as f64 * (-(k as f64)).exp2();
            (k as f64) <= log2n + 1.0 || mass >= NEGLIGIBLE_WAKE_MASS
        })
}

/// `s = Π(1 - x_k)` and `p = Σ x_k Π_{i≠k}(1 - x_i)` without dividing by any
/// `1 - x_k`.
fn exactly_one(xs: &[f64]) -> RoundFormula {
    let mut suffix = vec![1.0; xs.len() + 1];
    for i in (0..xs.len()).rev() {
        suffix[i] = suffix[i + 1] * (1.0 - xs[i]);
    }
    let mut prefix = 1.0;
    let mut p = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        p += x * prefix * suffix[i + 1];
        prefix *= 1.0 - x;
    }
    RoundFormula { p, s: suffix[0] }
}

/// Round-`j` model probabilities for the strong-model protocol.
///
/// `p` only counts rounds in which exactly one slot has a unique broadcaster,
/// so it is a lower bound on the true success probability
/// ([`exact_round_success_alg1`]).
pub fn p_round_alg1_formula(
    n: u64,
    j: u32,
    alpha: f64,
    k_start: u32,
) -> Result<RoundFormula, AnalysisError> {
    check_round(n, j, alpha, k_start)?;
    let us: Vec<f64> = slot_exponents(n, j, alpha, k_start)
        .map(|k| unique_broadcast_prob(n, k))
        .collect();
    Ok(exactly_one(&us))
}

/// Round-`j` model probabilities for the weak-model protocol, built from
/// `v_k = ½·C(n,2)·4^-k·(1 - 2^-k)^(n-2)`, the probability that exactly two
/// stations wake in slot `k` and one of them sends while the other listens.
pub fn p_round_alg2_formula(
    n: u64,
    j: u32,
    alpha: f64,
    k_start: u32,
) -> Result<RoundFormula, AnalysisError> {
    check_round(n, j, alpha, k_start)?;
    let pairs = n as f64 * (n - 1) as f64 / 2.0;
    let mut vs = Vec::new();
    for k in slot_exponents(n, j, alpha, k_start) {
        let p = (-(k as f64)).exp2();
        let v = (0.5f64.ln() + pairs.ln() + 2.0 * p.ln() + (n - 2) as f64 * (-p).ln_1p()).exp();
        if v > 1.0 {
            return Err(AnalysisError::Domain(format!("v_{k} = {v} exceeds 1")));
        }
        vs.push(v);
    }
    Ok(exactly_one(&vs))
}

/// Exact probability that the strong-model protocol elects a leader in
/// round `j`, by a dynamic program over the number of distinct candidates.
///
/// Stations are exchangeable, so the lone broadcaster of a slot (if any) is
/// uniform over the `n` stations, and it is a new candidate with
/// probability `(n - c)/n`.
pub fn exact_round_success_alg1(
    n: u64,
    j: u32,
    alpha: f64,
    k_start: u32,
) -> Result<f64, AnalysisError> {
    check_round(n, j, alpha, k_start)?;
    if n > MAX_ALG1_DP_STATIONS {
        return Err(AnalysisError::Size {
            n,
            max: MAX_ALG1_DP_STATIONS,
        });
    }
    let nf = n as f64;
    let mut dist = vec![0.0; n as usize + 1];
    dist[0] = 1.0;
    for k in slot_exponents(n, j, alpha, k_start) {
        let u = unique_broadcast_prob(n, k);
        for c in (0..=n as usize).rev() {
            let stay = dist[c] * (1.0 - u + c as f64 * u / nf);
            let from_below = if c > 0 {
                dist[c - 1] * (nf - (c - 1) as f64) * u / nf
            } else {
                0.0
            };
            dist[c] = stay + from_below;
        }
    }
    Ok(dist[1])
}

/// Same probability as [`exact_round_success_alg1`] for any `n`, tracking
/// only whether there are zero, one, or several candidates.
pub fn exact_round_success_alg1_collapsed(
    n: u64,
    j: u32,
    alpha: f64,
    k_start: u32,
) -> Result<f64, AnalysisError> {
    check_round(n, j, alpha, k_start)?;
    let nf = n as f64;
    let (mut none, mut one) = (1.0, 0.0);
    for k in slot_exponents(n, j, alpha, k_start) {
        let u = unique_broadcast_prob(n, k);
        one = none * u + one * (1.0 - u + u / nf);
        none *= 1.0 - u;
    }
    Ok(one)
}

/// Exact probability that the weak-model protocol elects a leader in round
/// `j`, for at most [`MAX_ALG2_DP_STATIONS`] stations.
///
/// Every slot is expanded into all `3^n` sleep/send/listen outcomes; the
/// state carried between slots is the set of witness stations. The round
/// succeeds exactly when one station ends up a witness.
pub fn exact_round_success_alg2(
    n: u64,
    j: u32,
    alpha: f64,
    k_start: u32,
) -> Result<f64, AnalysisError> {
    check_round(n, j, alpha, k_start)?;
    if n > MAX_ALG2_DP_STATIONS {
        return Err(AnalysisError::Size {
            n,
            max: MAX_ALG2_DP_STATIONS,
        });
    }
    let n = n as usize;
    let states = 1usize << n;
    let outcomes = 3usize.pow(n as u32);
    let mut dist = vec![0.0; states];
    dist[0] = 1.0;
    let mut witnessed = vec![0.0; states];
    for k in slot_exponents(n as u64, j, alpha, k_start) {
        let p = (-(k as f64)).exp2();
        // Probability that the slot has a lone sender heard by exactly the
        // listeners in each set.
        witnessed.fill(0.0);
        for code in 0..outcomes {
            let (mut c, mut prob, mut senders, mut listeners) = (code, 1.0, 0, 0usize);
            for s in 0..n {
                match c % 3 {
                    0 => prob *= 1.0 - p,
                    1 => {
                        prob *= p / 2.0;
                        senders += 1;
                    }
                    _ => {
                        prob *= p / 2.0;
                        listeners |= 1 << s;
                    }
                }
                c /= 3;
            }
            if senders == 1 {
                witnessed[listeners] += prob;
            }
        }
        let quiet: f64 = 1.0 - witnessed.iter().sum::<f64>();
        let mut next = vec![0.0; states];
        for (w, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            next[w] += mass * quiet;
            for (l, &q) in witnessed.iter().enumerate() {
                next[w | l] += mass * q;
            }
        }
        dist = next;
    }
    Ok((0..n).map(|s| dist[1 << s]).sum())
}

/// Exact per-round success probabilities for rounds `1..=rounds`.
///
/// Uses [`exact_round_success_alg1_collapsed`] for the strong-model
/// protocol and [`exact_round_success_alg2`] (small `n` only) for the weak
/// one.
pub fn round_success_profile(
    protocol: Protocol,
    n: u64,
    alpha: f64,
    k_start: u32,
    rounds: u32,
) -> Result<Vec<f64>, AnalysisError> {
    (1..=rounds)
        .map(|j| match protocol {
            Protocol::Candidate => exact_round_success_alg1_collapsed(n, j, alpha, k_start),
            Protocol::Witness => exact_round_success_alg2(n, j, alpha, k_start),
        })
        .collect()
}

/// Exact expectations of an execution, conditioned on it electing a leader
/// within the round cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedCost {
    pub rounds: f64,
    pub probabilistic_slots: f64,
    pub total_slots: f64,
    /// Probability of electing within the cap.
    pub termination_probability: f64,
}

/// Expected rounds and slots of an election among `n` stations, with the
/// same cap rules as the simulator: at most `max_rounds` rounds, and none
/// longer than the slot budget.
pub fn expected_cost(
    protocol: Protocol,
    n: u64,
    alpha: f64,
    k_start: u32,
    max_rounds: u32,
) -> Result<ExpectedCost, AnalysisError> {
    let mut survive = 1.0;
    let (mut rounds, mut slots, mut total, mut done) = (0.0, 0.0, 0.0, 0.0);
    let (mut elapsed, mut elapsed_total) = (0.0, 0.0);
    for j in 1..=max_rounds {
        let Ok(length) = round_length(j, alpha) else {
            break;
        };
        let success = match protocol {
            Protocol::Candidate => exact_round_success_alg1_collapsed(n, j, alpha, k_start)?,
            Protocol::Witness => exact_round_success_alg2(n, j, alpha, k_start)?,
        };
        elapsed += length as f64;
        elapsed_total += (length + protocol.overhead_slots()) as f64;
        let stop = survive * success;
        rounds += stop * j as f64;
        slots += stop * elapsed;
        total += stop * elapsed_total;
        done += stop;
        survive *= 1.0 - success;
    }
    if done == 0.0 {
        return Err(AnalysisError::Domain(
            "no chance of electing a leader within the cap".into(),
        ));
    }
    Ok(ExpectedCost {
        rounds: rounds / done,
        probabilistic_slots: slots / done,
        total_slots: total / done,
        termination_probability: done,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn j_star_examples() {
        assert_eq!(j_star(256, 2.0), 3);
        assert_eq!(j_star(2, 1.7), 0);
        assert_eq!(j_star(65536, 1.3361), 10);
    }

    #[test]
    fn unique_broadcast_examples() {
        assert_abs_diff_eq!(unique_broadcast_prob(2, 1), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(unique_broadcast_prob(1, 1), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(unique_broadcast_prob(2, 2), 0.375, epsilon = 1e-15);
        assert!(unique_broadcast_prob(1 << 40, 1) == 0.0);
    }

    #[test]
    fn formula_examples() {
        let f = p_round_alg1_formula(2, 1, 2.0, 1).unwrap();
        assert_abs_diff_eq!(f.p, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f.s, 0.3125, epsilon = 1e-15);
        assert!(p_round_alg1_formula(1_000_000, 1, 2.0, 1).unwrap().p < 1e-3);
        let g = p_round_alg2_formula(2, 1, 2.0, 1).unwrap();
        assert_abs_diff_eq!(g.p, 0.1484375, epsilon = 1e-15);
        assert!(p_round_alg1_formula(1, 1, 2.0, 1).is_err());
    }

    #[test]
    fn exact_examples() {
        assert_eq!(exact_round_success_alg1(2, 1, 2.0, 1).unwrap(), 0.59375);
        assert_eq!(
            exact_round_success_alg2(2, 1, 2.0, 1).unwrap(),
            77.0 / 512.0
        );
        assert!(matches!(
            exact_round_success_alg1(65, 1, 2.0, 1),
            Err(AnalysisError::Size { n: 65, max: 64 })
        ));
        assert!(matches!(
            exact_round_success_alg2(9, 1, 2.0, 1),
            Err(AnalysisError::Size { .. })
        ));
        // Slots too sparse to ever wake anybody.
        assert_eq!(exact_round_success_alg2(2, 1, 2.0, 1100).unwrap(), 0.0);
    }

    #[test]
    fn collapsed_matches_full_dp() {
        for n in [2, 3, 7, 16, 64] {
            for j in 1..8 {
                let a = exact_round_success_alg1(n, j, 1.5, 1).unwrap();
                let b = exact_round_success_alg1_collapsed(n, j, 1.5, 1).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn expected_cost_is_consistent() {
        let c = expected_cost(Protocol::Candidate, 2, 2.0, 1, 64).unwrap();
        assert!(c.termination_probability > 1.0 - 1e-12);
        // Round 1 succeeds with probability 0.59375 and takes 2 slots.
        assert!(c.rounds > 1.0 && c.rounds < 2.0);
        assert_abs_diff_eq!(
            c.total_slots,
            c.probabilistic_slots + c.rounds,
            epsilon = 1e-9
        );
        assert!(expected_cost(Protocol::Witness, 9, 2.0, 1, 10).is_err());
    }
}
