// The slot-by-slot engine next to the fast one.
//
// Both consume the same per-station random streams, so they agree on every
// metric. The reference engine also hands back each station's final state.

use radio_elect::protocol::{run_reference_election, Election, ProtocolParams, StationCoins};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let params = ProtocolParams::witness(1.5);
    let n = 40;
    let mut fast = Election::new(params, n)?;
    for seed in 0..5 {
        let coins = StationCoins::new(seed);
        let (reference, states) = run_reference_election(params, n, &coins)?;
        let quick = fast.run(&coins)?;
        assert_eq!(reference, quick);
        let leaders = states.iter().filter(|s| s.leader).count();
        let informed = states.iter().filter(|s| s.knows_terminated).count();
        println!(
            "seed {seed}: rounds {}, leader {:?}, {leaders} leader flag(s), {informed}/{n} informed",
            reference.rounds_used, reference.leader_index
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
