// The series constants and the time constant `c_q(alpha)`.
//
// Small `alpha` keeps stations asleep longer but lengthens the election.

use radio_elect::analysis::{c_of_alpha, optimal_alpha, series_constants, CostProfile};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let k = series_constants();
    println!(
        "s_inf: {:.6} (strong), {:.6} (weak); q1 = {}, q2 = {}",
        k.s_inf_alg1, k.s_inf_alg2, k.q1, k.q2
    );
    for q in [k.q1, k.q2] {
        let (alpha, c) = optimal_alpha(q)?;
        let limit = CostProfile::new(q, alpha)?.alpha_max;
        println!(
            "q = {q}: best alpha {alpha:.4} gives c = {c:.3}; alpha must stay below {limit:.3}"
        );
        for a in [1.1, 1.3, 1.6, 2.0, 2.5] {
            match c_of_alpha(q, a) {
                Ok(c) => println!(
                    "  alpha {a:.1}: c = {c:.3}, awake factor 1/ln(alpha) = {:.3}",
                    1.0 / a.ln()
                ),
                Err(e) => println!("  alpha {a:.1}: {e}"),
            }
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
