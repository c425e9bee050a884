//! First-success indices of two Bernoulli sequences under the monotone
//! coupling.

use super::HarnessError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Empirical comparison of `H` (first success with probabilities `p_seq`)
/// and `K` (first success with probabilities `q_seq`).
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub samples: u64,
    /// Entry `k - 1`: fraction of samples with `H ≤ k`. The last index is
    /// the appended sure success, so the last entry is 1.
    pub cdf_h: Vec<f64>,
    pub cdf_k: Vec<f64>,
    /// Samples with `K > H`. The coupling makes this impossible.
    pub coupling_violations: u64,
    /// Samples with `K = H`.
    pub ties: u64,
    /// Indices `k` (1-based) where `P(K ≤ k)` falls more than 3σ below
    /// `P(H ≤ k)`.
    pub cdf_violations: Vec<usize>,
    /// Largest `P(H ≤ k) - P(K ≤ k)`, negative when `K` leads everywhere.
    pub max_cdf_gap: f64,
}

impl DominanceReport {
    pub fn holds(&self) -> bool {
        self.coupling_violations == 0 && self.cdf_violations.is_empty()
    }
}

/// Samples `(H, K)` with one uniform `U_j` per index: `X_j = 1` iff
/// `U_j < p_j` and `Y_j = 1` iff `U_j < q_j`. A final index with
/// probability 1 is appended to both sequences so both indices are finite.
pub fn dominance_check(
    p_seq: &[f64],
    q_seq: &[f64],
    samples: u64,
    seed: u64,
) -> Result<DominanceReport, HarnessError> {
    if p_seq.len() != q_seq.len() {
        return Err(HarnessError::Precondition(format!(
            "sequence lengths differ: {} and {}",
            p_seq.len(),
            q_seq.len()
        )));
    }
    if samples == 0 {
        return Err(HarnessError::Precondition(
            "samples must be positive".into(),
        ));
    }
    for (i, (&p, &q)) in p_seq.iter().zip(q_seq).enumerate() {
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
            return Err(HarnessError::Precondition(format!(
                "probabilities at index {} outside [0, 1]: {p}, {q}",
                i + 1
            )));
        }
        if p > q {
            return Err(HarnessError::Precondition(format!(
                "p > q at index {}: {p} > {q}",
                i + 1
            )));
        }
    }

    let len = p_seq.len() + 1;
    let mut hits_h = vec![0u64; len];
    let mut hits_k = vec![0u64; len];
    let mut coupling_violations = 0;
    let mut ties = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut k = None;
        let mut h = len - 1;
        for j in 0..len - 1 {
            let u: f64 = rng.random();
            if k.is_none() && u < q_seq[j] {
                k = Some(j);
            }
            if u < p_seq[j] {
                h = j;
                break;
            }
        }
        let k = k.unwrap_or(len - 1);
        hits_h[h] += 1;
        hits_k[k] += 1;
        match k.cmp(&h) {
            std::cmp::Ordering::Greater => coupling_violations += 1,
            std::cmp::Ordering::Equal => ties += 1,
            std::cmp::Ordering::Less => {}
        }
    }

    let cdf = |hits: &[u64]| -> Vec<f64> {
        hits.iter()
            .scan(0u64, |acc, &c| {
                *acc += c;
                Some(*acc as f64 / samples as f64)
            })
            .collect()
    };
    let cdf_h = cdf(&hits_h);
    let cdf_k = cdf(&hits_k);
    let n = samples as f64;
    let mut cdf_violations = Vec::new();
    let mut max_cdf_gap = f64::NEG_INFINITY;
    for (i, (&fh, &fk)) in cdf_h.iter().zip(&cdf_k).enumerate() {
        let sigma = ((fh * (1.0 - fh) + fk * (1.0 - fk)) / n).sqrt();
        let gap = fh - fk;
        max_cdf_gap = max_cdf_gap.max(gap);
        if gap > 3.0 * sigma {
            cdf_violations.push(i + 1);
        }
    }
    Ok(DominanceReport {
        samples,
        cdf_h,
        cdf_k,
        coupling_violations,
        ties,
        cdf_violations,
        max_cdf_gap,
    })
}
