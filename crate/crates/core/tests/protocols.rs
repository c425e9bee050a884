use proptest::prelude::*;
use radio_elect::protocol::{
    run_election, run_election_with_labels, run_reference_election, Election, Protocol,
    ProtocolParams, SimError, StationCoins,
};

#[test]
fn spec_examples() {
    let m = run_election(ProtocolParams::candidate(2.0), 2, 0).unwrap();
    assert!(m.terminated);
    assert!(m.leader_index.unwrap() < 2);
    assert_eq!(m.total_slots, m.probabilistic_slots + m.rounds_used as u64);

    let m = run_election(ProtocolParams::witness(1.5), 16, 3).unwrap();
    assert_eq!(
        m.total_slots,
        m.probabilistic_slots + 2 * m.rounds_used as u64
    );
    assert!(matches!(
        run_election(ProtocolParams::candidate(1.5), 1, 0),
        Err(SimError::ConfigInvalid(_))
    ));
    assert!(run_election(ProtocolParams::witness(1.0), 8, 0).is_err());
}

#[test]
fn labels_are_only_bookkeeping() {
    // Permuting which index carries which random stream permutes the
    // outcome and nothing else.
    let params = ProtocolParams::candidate(1.5);
    let labels: Vec<u64> = (0..30).collect();
    let mut reversed = labels.clone();
    reversed.reverse();
    let a = run_election_with_labels(params, 5, labels).unwrap();
    let b = run_election_with_labels(params, 5, reversed).unwrap();
    assert_eq!(a.rounds_used, b.rounds_used);
    assert_eq!(a.leader_index.unwrap(), 29 - b.leader_index.unwrap());
    let mut awake = b.awake_per_station.clone();
    awake.reverse();
    assert_eq!(a.awake_per_station, awake);
}

fn params() -> impl Strategy<Value = ProtocolParams> {
    (
        prop_oneof![Just(Protocol::Candidate), Just(Protocol::Witness)],
        prop_oneof![Just(1.3361), Just(1.5), Just(2.0), 1.05f64..2.5],
        1u32..4,
    )
        .prop_map(|(p, a, k)| ProtocolParams::new(p, a).with_k_start(k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn engines_agree_and_elect_one_leader(params in params(), n in 2usize..80, seed: u64) {
        let coins = StationCoins::new(seed);
        let fast = Election::new(params, n).unwrap().run(&coins);
        match run_reference_election(params, n, &coins) {
            Ok((metrics, states)) => {
                prop_assert_eq!(fast.unwrap(), metrics.clone());
                let leaders: Vec<usize> = (0..n).filter(|&i| states[i].leader).collect();
                prop_assert_eq!(leaders, vec![metrics.leader_index.unwrap()]);
                prop_assert!(states.iter().all(|s| s.knows_terminated));
                // Every station is awake in the closing slot of every round.
                let rounds = metrics.rounds_used;
                prop_assert!(metrics.awake_per_station.iter().all(|&a| a >= rounds));
                prop_assert_eq!(
                    metrics.total_slots - metrics.probabilistic_slots,
                    params.protocol.overhead_slots() * rounds as u64
                );
            }
            Err(SimError::RoundCapExceeded { metrics }) => match fast {
                Err(SimError::RoundCapExceeded { metrics: m }) => prop_assert_eq!(m, metrics),
                other => prop_assert!(false, "fast engine returned {:?}", other),
            },
            Err(e) => prop_assert!(false, "reference engine failed: {}", e),
        }
    }

    #[test]
    fn deterministic(params in params(), n in 2usize..200, seed: u64) {
        prop_assert_eq!(
            run_election(params, n, seed).map_err(|e| e.to_string()),
            run_election(params, n, seed).map_err(|e| e.to_string())
        );
    }
}

#[test]
fn rounds_past_j_star_plus_25_are_rare() {
    use radio_elect::analysis::j_star;
    use radio_elect::harness::{run_trials, TrialConfig};
    for alpha in [1.3361, 1.5, 2.0] {
        for n in [64usize, 1024] {
            let trials = 20_000;
            let s = run_trials(&TrialConfig::new(
                ProtocolParams::candidate(alpha),
                n,
                trials,
                25,
            ))
            .unwrap();
            let limit = (j_star(n as u64, alpha) + 25) as usize;
            let beyond = s.per_round_attempts.get(limit).copied().unwrap_or(0);
            assert!(
                (beyond as f64) / (trials as f64) < 1e-4,
                "alpha {alpha}, n {n}: {beyond}"
            );
        }
    }
}
