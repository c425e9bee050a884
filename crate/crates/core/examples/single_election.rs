// One election with each protocol, and what it cost.

use radio_elect::protocol::{run_election, ProtocolParams};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let n = 10_000;
    for params in [
        ProtocolParams::candidate(1.3361),
        ProtocolParams::witness(1.3295),
    ] {
        let m = run_election(params, n, 2024)?;
        let busiest = m.awake_per_station.iter().max().copied().unwrap_or(0);
        let mean = m.awake_per_station.iter().map(|&a| a as f64).sum::<f64>() / n as f64;
        println!(
            "{}: station {} elected in round {} after {} slots ({} probabilistic); \
             awake slots: mean {mean:.2}, max {busiest}",
            params.protocol.name(),
            m.leader_index.ok_or("no leader")?,
            m.rounds_used,
            m.total_slots,
            m.probabilistic_slots,
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
