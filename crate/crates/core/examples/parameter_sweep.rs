// Time against energy across `alpha`, printed as CSV.

use radio_elect::harness::sweep;
use radio_elect::protocol::Protocol;
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let rows = sweep(
        &[256, 4096],
        &[1.2, 1.3361, 1.6, 2.0],
        Protocol::Candidate,
        200,
        11,
    )?;
    println!("n,alpha,mean_probabilistic_slots,slot_bound,mean_awake_max,awake_bound,exact_slots");
    for r in &rows {
        println!(
            "{},{},{:.2},{:.2},{:.2},{:.2},{:.2}",
            r.n,
            r.alpha,
            r.stats.probabilistic_slots.mean,
            r.slot_bound,
            r.stats.awake_max.mean,
            r.awake_bound,
            r.exact.map_or(f64::NAN, |e| e.probabilistic_slots)
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
