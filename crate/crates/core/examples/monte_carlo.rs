// Many independent elections with confidence intervals, checked against
// the exact expectation.

use radio_elect::analysis::{exact_round_success_alg1, expected_cost};
use radio_elect::harness::{run_trials, TrialConfig};
use radio_elect::protocol::{Protocol, ProtocolParams};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let params = ProtocolParams::candidate(2.0);
    let stats = run_trials(&TrialConfig::new(params, 2, 20_000, 1))?;
    let p1 = exact_round_success_alg1(2, 1, 2.0, 1)?;
    println!(
        "round-1 success: measured {:.4}, exact {p1}",
        stats.round1_success_freq
    );

    let params = ProtocolParams::candidate(1.3361);
    let n = 4096;
    let stats = run_trials(&TrialConfig::new(params, n, 400, 5))?;
    let exact = expected_cost(Protocol::Candidate, n as u64, 1.3361, 1, 64)?;
    println!(
        "n = {n}: rounds {:.3} ± {:.3} (exact {:.3}), probabilistic slots {:.1} ± {:.1} (exact {:.1})",
        stats.rounds.mean,
        stats.rounds.half_width,
        exact.rounds,
        stats.probabilistic_slots.mean,
        stats.probabilistic_slots.half_width,
        exact.probabilistic_slots
    );
    println!(
        "awake slots per station: mean {:.2}, busiest {:.2}",
        stats.awake_mean.mean, stats.awake_max.mean
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
