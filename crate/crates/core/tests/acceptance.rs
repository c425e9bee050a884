//! The reproduction suite, one test per criterion.
//!
//! Criteria 1 to 8 run once and are shared; criterion 9 reruns them and
//! compares the output. Each test prints its verdict line, then checks the
//! verdict against `EXPECTED`. Two criteria fail on the merits (see the
//! details printed with them), so a change in either direction shows up
//! as a test failure.

use radio_elect::verify::{check_determinism, run_criterion, CriterionOutcome};
use std::sync::OnceLock;

const EXPECTED: [(u32, bool); 9] = [
    (1, true),
    (2, true),
    (3, true),
    // The closed-form round probabilities exceed 0.37 (and 0.19) at the
    // smaller sizes: the fluctuation headroom is too thin there.
    (4, false),
    (5, true),
    (6, true),
    // Mean time exceeds c·log2 n for alg1 at 2^16 and for alg2 everywhere,
    // and the awake-ratio drift does not shrink monotonically.
    (7, false),
    (8, true),
    (9, true),
];

fn first_run() -> &'static [CriterionOutcome] {
    static RUN: OnceLock<Vec<CriterionOutcome>> = OnceLock::new();
    RUN.get_or_init(|| {
        (1..=8)
            .map(|id| run_criterion(id).expect("criterion runs"))
            .collect()
    })
}

fn report(outcome: &CriterionOutcome) {
    print!("{outcome}");
    println!("{}", outcome.headline());
    let expected = EXPECTED.iter().find(|e| e.0 == outcome.id).unwrap().1;
    assert_eq!(outcome.passed, expected, "C{} verdict changed", outcome.id);
}

fn criterion(id: u32) {
    report(&first_run()[id as usize - 1]);
}

#[test]
fn c1_series_constants() {
    criterion(1);
}

#[test]
fn c2_cost_constant() {
    criterion(2);
}

#[test]
fn c3_harmonic_sums() {
    criterion(3);
}

#[test]
fn c4_finite_n_bounds() {
    criterion(4);
}

#[test]
fn c5_oracle_agreement() {
    criterion(5);
}

#[test]
fn c6_safety() {
    criterion(6);
}

#[test]
fn c7_scaling() {
    criterion(7);
}

#[test]
fn c8_dominance() {
    criterion(8);
}

#[test]
fn c9_determinism() {
    report(&check_determinism(first_run()).expect("rerun succeeds"));
}
