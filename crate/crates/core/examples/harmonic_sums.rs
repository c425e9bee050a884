// Finite harmonic sums and their limits.
//
// The sums oscillate around their limits with a tiny period-one
// fluctuation in `log2 n`.

use radio_elect::analysis::{lemma1_sum, lemma2_limit, lemma2_sum};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    println!("1/ln 2 = {:.8}", 1.0 / std::f64::consts::LN_2);
    for t in 0..8 {
        let log_n = 20.0 + t as f64 / 8.0;
        let n = log_n.exp2().round() as u64;
        println!("log2 n = {log_n:.3}: first sum {:.8}", lemma1_sum(n, 80));
    }
    for m in 1..=5 {
        let s = lemma2_sum(1 << 20, m, 1, 60)?;
        println!("m = {m}: sum {s:.8}, limit {:.8}", lemma2_limit(m));
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
