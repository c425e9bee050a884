// First-success times under the monotone coupling: raising every
// per-round success probability can only bring the first success earlier.

use radio_elect::analysis::{j_star, p_round_alg1_formula, series_constants};
use radio_elect::harness::dominance_check;
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (n, alpha, rounds) = (1u64 << 12, 1.3361, 30);
    let q1 = series_constants().q1;
    let js = j_star(n, alpha);
    let lower: Vec<f64> = (1..=rounds)
        .map(|j| if j > js { q1 } else { 0.0 })
        .collect();
    let upper = (1..=rounds)
        .map(|j| Ok(1.0 - p_round_alg1_formula(n, j, alpha, 1)?.s))
        .collect::<Result<Vec<f64>, Box<dyn Error>>>()?;
    let report = dominance_check(&lower, &upper, 200_000, 3)?;
    println!(
        "{} samples, {} with K > H, {} ties",
        report.samples, report.coupling_violations, report.ties
    );
    for k in js as usize..js as usize + 4 {
        println!(
            "P(H <= {}) = {:.4}   P(K <= {}) = {:.4}",
            k + 1,
            report.cdf_h[k],
            k + 1,
            report.cdf_k[k]
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
