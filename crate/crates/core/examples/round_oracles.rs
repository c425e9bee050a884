// Exact per-round success probabilities against the closed forms.

use radio_elect::analysis::{
    exact_round_success_alg1, exact_round_success_alg2, j_star, p_round_alg1_formula,
    p_round_alg2_formula,
};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let alpha = 1.3361;
    let n = 16;
    println!("strong model, n = {n}, j* = {}", j_star(n, alpha));
    println!("round  formula p  formula s  exact");
    for j in 1..=10 {
        let f = p_round_alg1_formula(n, j, alpha, 1)?;
        let exact = exact_round_success_alg1(n, j, alpha, 1)?;
        println!("{j:>5}  {:>9.6}  {:>9.6}  {exact:.6}", f.p, f.s);
    }

    let n = 6;
    println!("weak model, n = {n}");
    for j in 1..=6 {
        let f = p_round_alg2_formula(n, j, alpha, 1)?;
        let exact = exact_round_success_alg2(n, j, alpha, 1)?;
        println!("{j:>5}  {:>9.6}  {:>9.6}  {exact:.6}", f.p, f.s);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
