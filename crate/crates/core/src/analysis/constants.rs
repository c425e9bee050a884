//! Series constants, the expected-time constant `c_q(alpha)` and the
//! harmonic sums behind them.

use super::AnalysisError;
use std::f64::consts::LN_2;

/// Amplitude bound of the periodic fluctuation in the first harmonic sum.
pub const FLUCTUATION_BUDGET_LEMMA1: f64 = 1e-6;
/// Amplitude bound of the periodic fluctuation in the higher-power sums.
pub const FLUCTUATION_BUDGET_LEMMA2: f64 = 1e-5;

/// Per-round success bound used for the strong-model protocol's time
/// constant.
pub const Q1_BOUND: f64 = 0.6305;
/// Per-round success bound used for the weak-model protocol's time
/// constant.
pub const Q2_BOUND: f64 = 0.6176;

const SERIES_CUTOFF: f64 = 1e-15;

/// Limits of the per-round probabilities as `n` grows, and the derived
/// bounds `q1`, `q2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConstants {
    pub sum_s1: f64,
    pub sum_s2: f64,
    pub sum_s3: f64,
    pub sum_s4: f64,
    /// `e^-S1`: limit of the no-candidate probability (strong model).
    pub s_inf_alg1: f64,
    /// `e^-S3`: limit of the no-witness probability (weak model).
    pub s_inf_alg2: f64,
    /// `e^-S1 · S2`.
    pub p_inf_alg1: f64,
    /// `e^-S3 · S4`.
    pub p_inf_alg2: f64,
    pub q1: f64,
    pub q2: f64,
    pub fluctuation_budget_lemma1: f64,
    pub fluctuation_budget_lemma2: f64,
}

/// `Σ_{m≥1} m! / (base^m · m^(m + extra) · ln 2)`, summed in ascending order
/// until the next term drops below 1e-15.
fn factorial_series(base: f64, extra: i32) -> f64 {
    let mut sum = 0.0;
    let mut factorial = 1.0;
    for m in 1.. {
        factorial *= m as f64;
        let term = factorial / (base.powi(m) * (m as f64).powi(m + extra) * LN_2);
        if term < SERIES_CUTOFF {
            break;
        }
        sum += term;
    }
    sum
}

fn round_up_4(x: f64) -> f64 {
    (x * 1e4).ceil() / 1e4
}

/// Computes the series constants by direct summation.
///
/// `q = 1 - ⌈p_inf + 1e-5⌉`, rounded up at the fourth decimal, leaves room
/// for the periodic fluctuations that the limits ignore.
pub fn series_constants() -> AnalysisConstants {
    let sum_s1 = factorial_series(1.0, 2);
    let sum_s2 = factorial_series(1.0, 1);
    let sum_s3 = factorial_series(2.0, 2);
    let sum_s4 = factorial_series(2.0, 1);
    let s_inf_alg1 = (-sum_s1).exp();
    let s_inf_alg2 = (-sum_s3).exp();
    let p_inf_alg1 = s_inf_alg1 * sum_s2;
    let p_inf_alg2 = s_inf_alg2 * sum_s4;
    AnalysisConstants {
        sum_s1,
        sum_s2,
        sum_s3,
        sum_s4,
        s_inf_alg1,
        s_inf_alg2,
        p_inf_alg1,
        p_inf_alg2,
        q1: 1.0 - round_up_4(p_inf_alg1 + FLUCTUATION_BUDGET_LEMMA2),
        q2: 1.0 - round_up_4(p_inf_alg2 + FLUCTUATION_BUDGET_LEMMA2),
        fluctuation_budget_lemma1: FLUCTUATION_BUDGET_LEMMA1,
        fluctuation_budget_lemma2: FLUCTUATION_BUDGET_LEMMA2,
    }
}

/// One point of the time/energy trade-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostProfile {
    pub q: f64,
    pub alpha: f64,
    pub c: f64,
    /// `1 / (1 - q)`, or infinity for `q = 1`.
    pub alpha_max: f64,
}

impl CostProfile {
    pub fn new(q: f64, alpha: f64) -> Result<Self, AnalysisError> {
        Ok(Self {
            q,
            alpha,
            c: c_of_alpha(q, alpha)?,
            alpha_max: alpha_max(q),
        })
    }
}

fn alpha_max(q: f64) -> f64 {
    if q >= 1.0 {
        f64::INFINITY
    } else {
        1.0 / (1.0 - q)
    }
}

fn check_q(q: f64) -> Result<(), AnalysisError> {
    if q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(AnalysisError::Domain(format!(
            "q must lie in (0, 1], got {q}"
        )))
    }
}

/// `c_q(alpha) = q·alpha³ / ((alpha - 1)(1 - alpha(1 - q)))`: with per-round
/// success probability at least `q` from some round on, the expected
/// election time is at most `c_q(alpha)·log2 n` slots.
pub fn c_of_alpha(q: f64, alpha: f64) -> Result<f64, AnalysisError> {
    check_q(q)?;
    if !(alpha > 1.0 && alpha < alpha_max(q)) {
        return Err(AnalysisError::Domain(format!(
            "alpha = {alpha} outside (1, {})",
            alpha_max(q)
        )));
    }
    Ok(q * alpha.powi(3) / ((alpha - 1.0) * (1.0 - alpha * (1.0 - q))))
}

/// Minimizes [`c_of_alpha`] over its domain: a grid scan picks the best
/// bracket, then golden-section search narrows it to 1e-7.
pub fn optimal_alpha(q: f64) -> Result<(f64, f64), AnalysisError> {
    check_q(q)?;
    let lo = 1.0;
    let hi = alpha_max(q).min(64.0);
    const GRID: usize = 4000;
    let step = (hi - lo) / GRID as f64;
    let c = |a: f64| c_of_alpha(q, a).unwrap_or(f64::INFINITY);
    let best = (1..GRID)
        .map(|i| lo + i as f64 * step)
        .min_by(|a, b| c(*a).total_cmp(&c(*b)))
        .expect("grid is not empty");

    let (mut a, mut b) = (best - step, best + step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (c(x1), c(x2));
    while b - a > 1e-7 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = c(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = c(x2);
        }
    }
    let alpha = (a + b) / 2.0;
    Ok((alpha, c_of_alpha(q, alpha)?))
}

/// `Σ_{k=1}^{r} (n / 2^k) e^(-n / 2^k)`, which tends to `1 / ln 2`.
pub fn lemma1_sum(n: u64, r: u32) -> f64 {
    (1..=r)
        .map(|k| {
            let x = n as f64 * (-(k as f64)).exp2();
            x * (-x).exp()
        })
        .sum()
}

/// `Σ_{k=r1}^{r2} (n / 2^k)^m e^(-n m / 2^k)`, which tends to
/// [`lemma2_limit`]`(m)`.
pub fn lemma2_sum(n: u64, m: u32, r1: i32, r2: i32) -> Result<f64, AnalysisError> {
    if r1 >= r2 {
        return Err(AnalysisError::Precondition(format!(
            "need r1 < r2, got {r1} and {r2}"
        )));
    }
    if m == 0 {
        return Err(AnalysisError::Precondition("m must be positive".into()));
    }
    let m_f = m as f64;
    Ok((r1..=r2)
        .map(|k| {
            let x = n as f64 * (-(k as f64)).exp2();
            (m_f * x.ln() - m_f * x).exp()
        })
        .sum())
}

/// `m! / (m^(m+1) ln 2)`.
pub fn lemma2_limit(m: u32) -> f64 {
    let factorial: f64 = (1..=m).map(|i| i as f64).product();
    factorial / ((m as f64).powi(m as i32 + 1) * LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constants() {
        let c = series_constants();
        assert_abs_diff_eq!(c.s_inf_alg1, 0.188209, epsilon = 1e-5);
        assert_abs_diff_eq!(c.s_inf_alg2, 0.462, epsilon = 1e-3);
        assert_abs_diff_eq!(c.sum_s4, 0.8274, epsilon = 5e-4);
        assert_abs_diff_eq!(c.p_inf_alg1, 0.3691, epsilon = 5e-4);
        assert_abs_diff_eq!(c.q1, Q1_BOUND, epsilon = 1e-3);
        assert_abs_diff_eq!(c.q2, Q2_BOUND, epsilon = 1e-3);
        assert!((0.62..=0.64).contains(&c.q1) && (0.61..=0.63).contains(&c.q2));
    }

    #[test]
    fn cost_examples() {
        assert_abs_diff_eq!(c_of_alpha(0.6305, 1.3361).unwrap(), 8.837, epsilon = 0.01);
        assert_abs_diff_eq!(c_of_alpha(0.6176, 1.3295).unwrap(), 8.96, epsilon = 0.01);
        assert_abs_diff_eq!(c_of_alpha(1.0, 2.0).unwrap(), 8.0, epsilon = 1e-12);
        assert!(matches!(
            c_of_alpha(0.6305, 2.71),
            Err(AnalysisError::Domain(_))
        ));
        assert!(c_of_alpha(0.5, 1.0).is_err());
        assert!(c_of_alpha(0.0, 1.5).is_err());
    }

    #[test]
    fn cost_blows_up_at_both_ends() {
        for q in [Q1_BOUND, Q2_BOUND, 0.3] {
            assert!(c_of_alpha(q, 1.0 + 1e-5).unwrap() > 1e3);
            assert!(c_of_alpha(q, alpha_max(q) - 1e-5).unwrap() > 1e3);
        }
    }

    #[test]
    fn optimum() {
        let (a, c) = optimal_alpha(Q1_BOUND).unwrap();
        assert_abs_diff_eq!(a, 1.3361, epsilon = 1e-3);
        assert_abs_diff_eq!(c, 8.837, epsilon = 1e-2);
        let (a, _) = optimal_alpha(Q2_BOUND).unwrap();
        assert_abs_diff_eq!(a, 1.3295, epsilon = 1e-3);
        let (a, c) = optimal_alpha(1.0).unwrap();
        assert_abs_diff_eq!(a, 1.5, epsilon = 1e-6);
        assert_abs_diff_eq!(c, 6.75, epsilon = 1e-9);
    }

    #[test]
    fn harmonic_sums() {
        assert_eq!(lemma1_sum(1024, 0), 0.0);
        assert_abs_diff_eq!(lemma1_sum(1 << 20, 60), 1.0 / LN_2, epsilon = 1e-4);
        assert_abs_diff_eq!(lemma1_sum(1 << 10, 30), 1.0 / LN_2, epsilon = 2e-3);
        assert_abs_diff_eq!(
            lemma2_sum(1 << 20, 2, 1, 60).unwrap(),
            0.36067,
            epsilon = 1e-3
        );
        assert_abs_diff_eq!(
            lemma2_sum(1 << 20, 3, 1, 60).unwrap(),
            0.10687,
            epsilon = 1e-3
        );
        assert!(lemma2_sum(16, 1, 5, 5).is_err());
    }
}
