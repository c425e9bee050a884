//! The reproduction suite: every numeric claim the crate makes, checked at
//! a fixed tolerance with fixed seeds.
//!
//! Output is a pure function of the selected criteria, so two runs print
//! the same bytes.

use crate::analysis::{
    c_of_alpha, exact_round_success_alg1, exact_round_success_alg2, j_star, lemma1_sum,
    lemma2_limit, lemma2_sum, optimal_alpha, p_round_alg1_formula, series_constants, Q1_BOUND,
    Q2_BOUND,
};
use crate::harness::{
    dominance_check, run_trials, sweep, trial_seed, HarnessError, SweepRow, TrialConfig,
};
use crate::numeric::{combine, format_sig6 as f6};
use crate::protocol::{
    run_reference_election, Election, Protocol, ProtocolParams, SimError, StationCoins,
};
use rayon::prelude::*;
use std::f64::consts::LN_2;
use std::fmt;

/// Identifiers of every criterion, in the order they run.
pub const ALL_CRITERIA: [u32; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

pub const SEED_ORACLE: u64 = 1;
pub const SEED_SAFETY: u64 = 6;
pub const SEED_SCALING: u64 = 7;
pub const SEED_DOMINANCE: u64 = 8;

/// Outcome of one criterion: a verdict and the individual checks behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub checks: Vec<String>,
}

impl CriterionOutcome {
    /// `C<id> PASS|FAIL <title>`.
    pub fn headline(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("C{} {verdict} {}", self.id, self.title)
    }
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.headline())?;
        for check in &self.checks {
            writeln!(f, "  {check}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub outcomes: Vec<CriterionOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn get(&self, id: u32) -> Option<&CriterionOutcome> {
        self.outcomes.iter().find(|o| o.id == id)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            write!(f, "{o}")?;
        }
        let failed: Vec<_> = self
            .outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| format!("C{}", o.id))
            .collect();
        if failed.is_empty() {
            writeln!(f, "all {} criteria passed", self.outcomes.len())
        } else {
            writeln!(f, "failed: {}", failed.join(" "))
        }
    }
}

struct Checks {
    lines: Vec<String>,
    passed: bool,
}

impl Checks {
    fn new() -> Self {
        Self {
            lines: Vec::new(),
            passed: true,
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.lines
            .push(format!("[{}] {line}", if ok { "ok" } else { "FAIL" }));
    }

    fn within(&mut self, name: &str, value: f64, target: f64, tol: f64) {
        let ok = (value - target).abs() <= tol;
        self.check(
            ok,
            format!(
                "{name} = {} (target {} ± {})",
                f6(value),
                f6(target),
                f6(tol)
            ),
        );
    }

    fn note(&mut self, line: String) {
        self.lines.push(format!("[--] {line}"));
    }

    fn finish(self, id: u32, title: &'static str) -> CriterionOutcome {
        CriterionOutcome {
            id,
            title,
            passed: self.passed,
            checks: self.lines,
        }
    }
}

/// Runs the selected criteria in ascending order. Criterion 9 reruns every
/// other selected criterion (all of 1 to 8 when run alone) and compares the
/// output byte for byte.
pub fn verify(selected: &[u32]) -> Result<VerifyReport, HarnessError> {
    let mut ids: Vec<u32> = selected.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if let Some(bad) = ids.iter().find(|id| !ALL_CRITERIA.contains(id)) {
        return Err(HarnessError::Precondition(format!(
            "no criterion {bad}; criteria are numbered 1 to 9"
        )));
    }
    let mut outcomes = Vec::new();
    for &id in ids.iter().filter(|&&id| id != 9) {
        outcomes.push(run_criterion(id)?);
    }
    if ids.contains(&9) {
        let first = if outcomes.is_empty() {
            rerun(&ALL_CRITERIA[..8])?
        } else {
            outcomes.clone()
        };
        outcomes.push(check_determinism(&first)?);
    }
    Ok(VerifyReport { outcomes })
}

fn rerun(ids: &[u32]) -> Result<Vec<CriterionOutcome>, HarnessError> {
    ids.iter().map(|&id| run_criterion(id)).collect()
}

/// Runs a single criterion other than 9.
pub fn run_criterion(id: u32) -> Result<CriterionOutcome, HarnessError> {
    match id {
        1 => Ok(constants()),
        2 => cost_function(),
        3 => harmonic_sums(),
        4 => finite_n_bounds(),
        5 => oracle_agreement(),
        6 => safety(),
        7 => scaling(),
        8 => dominance(),
        _ => Err(HarnessError::Precondition(format!(
            "criterion {id} cannot run on its own"
        ))),
    }
}

fn constants() -> CriterionOutcome {
    let c = series_constants();
    let mut k = Checks::new();
    k.within("s_inf_alg1", c.s_inf_alg1, 0.188209, 1e-5);
    k.within("s_inf_alg2", c.s_inf_alg2, 0.462, 1e-3);
    k.within("sum_s4", c.sum_s4, 0.8274, 5e-4);
    k.within("q1", c.q1, Q1_BOUND, 1e-3);
    k.within("q2", c.q2, Q2_BOUND, 1e-3);
    k.note(format!(
        "sum_s1 = {}, sum_s2 = {}, sum_s3 = {}, p_inf_alg1 = {}, p_inf_alg2 = {}",
        f6(c.sum_s1),
        f6(c.sum_s2),
        f6(c.sum_s3),
        f6(c.p_inf_alg1),
        f6(c.p_inf_alg2)
    ));
    k.finish(1, "series constants")
}

fn cost_function() -> Result<CriterionOutcome, HarnessError> {
    let mut k = Checks::new();
    k.within(
        "c(0.6305, 1.3361)",
        c_of_alpha(Q1_BOUND, 1.3361)?,
        8.837,
        0.01,
    );
    let (alpha, c) = optimal_alpha(Q1_BOUND)?;
    k.within("optimal alpha(0.6305)", alpha, 1.3361, 1e-3);
    k.within("optimal c(0.6305)", c, 8.837, 1e-2);
    k.within(
        "c(0.6176, 1.3295)",
        c_of_alpha(Q2_BOUND, 1.3295)?,
        8.96,
        0.01,
    );
    k.within("1/(1 - q1)", 1.0 / (1.0 - Q1_BOUND), 2.707, 1e-2);
    k.within("1/(1 - q2)", 1.0 / (1.0 - Q2_BOUND), 2.61, 1e-2);
    let (alpha2, c2) = optimal_alpha(Q2_BOUND)?;
    k.note(format!(
        "optimal (alpha, c) for q2: ({}, {})",
        f6(alpha2),
        f6(c2)
    ));
    Ok(k.finish(2, "cost constant and its optimum"))
}

fn harmonic_sums() -> Result<CriterionOutcome, HarnessError> {
    let mut k = Checks::new();
    k.within(
        "lemma1_sum(2^20, 60)",
        lemma1_sum(1 << 20, 60),
        1.0 / LN_2,
        1e-4,
    );
    for m in 1..=5 {
        let v = lemma2_sum(1 << 20, m, 1, 60)?;
        k.within(
            &format!("lemma2_sum(2^20, {m}, 1, 60)"),
            v,
            lemma2_limit(m),
            1e-3,
        );
    }
    Ok(k.finish(3, "harmonic sums"))
}

fn finite_n_bounds() -> Result<CriterionOutcome, HarnessError> {
    let mut k = Checks::new();
    for e in (10..=20).step_by(2) {
        let n = 1u64 << e;
        let j = j_star(n, 1.3361) + 1;
        let r = p_round_alg1_formula(n, j, 1.3361, 1)?;
        k.check(
            r.s <= 0.19,
            format!("n = 2^{e}, j = {j}: s_j = {} <= 0.19", f6(r.s)),
        );
        k.check(
            r.p <= 0.37,
            format!("n = 2^{e}, j = {j}: p_j = {} <= 0.37", f6(r.p)),
        );
    }
    Ok(k.finish(4, "finite-n round bounds at j* + 1"))
}

fn oracle_agreement() -> Result<CriterionOutcome, HarnessError> {
    let mut k = Checks::new();
    let exact = exact_round_success_alg1(2, 1, 2.0, 1)?;
    k.check(
        exact == 0.59375,
        format!("exact alg1 (2, 1, 2) = {} (target 0.59375)", f6(exact)),
    );

    let mut worst = f64::INFINITY;
    let mut below = Vec::new();
    for alpha in [1.3361, 2.0] {
        for n in [2u64, 4, 8, 16] {
            for j in 1..=5 {
                let dp = exact_round_success_alg1(n, j, alpha, 1)?;
                let formula = p_round_alg1_formula(n, j, alpha, 1)?.p;
                worst = worst.min(dp - formula);
                if dp < formula {
                    below.push(format!("(n {n}, j {j}, alpha {alpha})"));
                }
            }
        }
    }
    k.check(
        below.is_empty(),
        format!(
            "exact >= formula on 40 cells, smallest margin {}{}",
            f6(worst),
            if below.is_empty() {
                String::new()
            } else {
                format!(", below at {}", below.join(" "))
            }
        ),
    );

    let trials = 100_000;
    for (params, target) in [
        (ProtocolParams::candidate(2.0), exact),
        (
            ProtocolParams::witness(2.0),
            exact_round_success_alg2(2, 1, 2.0, 1)?,
        ),
    ] {
        let stats = run_trials(&TrialConfig::new(params, 2, trials, SEED_ORACLE))?;
        let sigma = (target * (1.0 - target) / trials as f64).sqrt();
        let freq = stats.round1_success_freq;
        k.check(
            (freq - target).abs() <= 3.0 * sigma,
            format!(
                "{} n = 2, alpha = 2: round-1 success {} vs exact {} (3 sigma = {})",
                params.protocol.name(),
                f6(freq),
                f6(target),
                f6(3.0 * sigma)
            ),
        );
    }
    Ok(k.finish(5, "oracle agreement"))
}

#[derive(Debug, Default, Clone, Copy)]
struct SafetyTally {
    trials: u64,
    terminated: u64,
    one_leader: u64,
    all_informed: u64,
    engine_mismatch: u64,
    safety_errors: u64,
    legality_errors: u64,
}

fn safety_config(params: ProtocolParams, n: usize, trials: u64, seed: u64) -> SafetyTally {
    let mut t = SafetyTally {
        trials,
        ..Default::default()
    };
    let mut engine = Election::new(params, n).expect("valid configuration");
    for i in 0..trials {
        let coins = StationCoins::new(trial_seed(seed, i));
        let fast = engine.run(&coins);
        match run_reference_election(params, n, &coins) {
            Ok((metrics, states)) => {
                t.terminated += 1;
                let leaders: Vec<_> = (0..n).filter(|&s| states[s].leader).collect();
                if leaders.len() == 1 && metrics.leader_index == Some(leaders[0]) {
                    t.one_leader += 1;
                }
                if states.iter().all(|s| s.knows_terminated) {
                    t.all_informed += 1;
                }
                if fast.as_ref().ok() != Some(&metrics) {
                    t.engine_mismatch += 1;
                }
            }
            Err(SimError::RoundCapExceeded { metrics }) => {
                if !matches!(&fast, Err(SimError::RoundCapExceeded { metrics: m }) if *m == metrics)
                {
                    t.engine_mismatch += 1;
                }
            }
            Err(SimError::Channel(_)) => t.legality_errors += 1,
            Err(_) => t.safety_errors += 1,
        }
    }
    t
}

fn safety() -> Result<CriterionOutcome, HarnessError> {
    const TOTAL: u64 = 100_000;
    let mut configs = Vec::new();
    for protocol in [Protocol::Candidate, Protocol::Witness] {
        for n in [2usize, 3, 8, 64, 1024] {
            for alpha in [1.3361, 2.0, 1.5] {
                configs.push((ProtocolParams::new(protocol, alpha), n));
            }
        }
    }
    let count = configs.len() as u64;
    let tallies: Vec<SafetyTally> = configs
        .par_iter()
        .enumerate()
        .map(|(i, &(params, n))| {
            let i = i as u64;
            let trials = TOTAL / count + u64::from(i < TOTAL % count);
            safety_config(params, n, trials, combine(SEED_SAFETY, i))
        })
        .collect();

    let mut k = Checks::new();
    let mut total = SafetyTally::default();
    for (&(params, n), t) in configs.iter().zip(&tallies) {
        total.trials += t.trials;
        total.terminated += t.terminated;
        total.one_leader += t.one_leader;
        total.all_informed += t.all_informed;
        total.engine_mismatch += t.engine_mismatch;
        total.safety_errors += t.safety_errors;
        total.legality_errors += t.legality_errors;
        if t.terminated < t.trials {
            k.note(format!(
                "{} n = {n}, alpha = {}: {} of {} trials hit the round cap",
                params.protocol.name(),
                params.alpha,
                t.trials - t.terminated,
                t.trials
            ));
        }
    }
    k.note(format!(
        "{} trials over {count} configurations",
        total.trials
    ));
    k.check(
        total.one_leader == total.terminated,
        format!(
            "exactly one leader in {} of {} terminated runs",
            total.one_leader, total.terminated
        ),
    );
    k.check(
        total.all_informed == total.terminated,
        format!(
            "every station knows the outcome in {} of {} terminated runs",
            total.all_informed, total.terminated
        ),
    );
    k.check(
        total.safety_errors == 0,
        format!("{} safety violations", total.safety_errors),
    );
    k.check(
        total.legality_errors == 0,
        format!("{} weak-model legality violations", total.legality_errors),
    );
    k.check(
        total.engine_mismatch == 0,
        format!(
            "{} disagreements between the fast and reference engines",
            total.engine_mismatch
        ),
    );
    let rate = total.terminated as f64 / total.trials as f64;
    k.check(
        rate == 1.0,
        format!("termination rate {} with max_rounds = 64", f6(rate)),
    );
    Ok(k.finish(6, "safety over mixed configurations"))
}

fn scaling() -> Result<CriterionOutcome, HarnessError> {
    let ns = [1usize << 8, 1 << 12, 1 << 16, 1 << 20];
    let mut k = Checks::new();
    for protocol in [Protocol::Candidate, Protocol::Witness] {
        let rows = sweep(&ns, &[1.3361], protocol, 1000, SEED_SCALING)?;
        scaling_rows(&mut k, protocol, &rows);
    }
    Ok(k.finish(7, "time and awake scaling"))
}

fn scaling_rows(k: &mut Checks, protocol: Protocol, rows: &[SweepRow]) {
    let name = protocol.name();
    let mut ratios = Vec::new();
    for r in rows {
        let n = format!("{name} n = 2^{}", r.n.trailing_zeros());
        k.check(
            r.stats.termination_rate == 1.0,
            format!("{n}: termination rate {}", f6(r.stats.termination_rate)),
        );
        k.check(
            r.slot_bound_holds(),
            format!(
                "{n}: mean probabilistic slots {} ± {} <= c·log2 n = {}",
                f6(r.stats.probabilistic_slots.mean),
                f6(r.stats.probabilistic_slots.half_width),
                f6(r.slot_bound)
            ),
        );
        if let Some(exact) = r.exact {
            k.note(format!(
                "{n}: exact expected probabilistic slots {}, rounds {} (measured {})",
                f6(exact.probabilistic_slots),
                f6(exact.rounds),
                f6(r.stats.rounds.mean)
            ));
        }
        let ratio = r.stats.station_mean_awake_max / r.awake_bound;
        k.check(
            (0.5..=1.5).contains(&ratio),
            format!(
                "{n}: busiest station's mean awake slots {} / {} = {} in [0.5, 1.5]",
                f6(r.stats.station_mean_awake_max),
                f6(r.awake_bound),
                f6(ratio)
            ),
        );
        k.note(format!(
            "{n}: mean over trials of the per-trial maximum {} (ratio {})",
            f6(r.stats.awake_max.mean),
            f6(r.awake_ratio())
        ));
        ratios.push(ratio);
    }
    let drifts: Vec<f64> = ratios.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let shrinking = drifts.windows(2).all(|d| d[1] <= d[0]);
    k.check(
        shrinking,
        format!(
            "{name}: awake ratio drift between successive n shrinks: {}",
            drifts.iter().map(|&d| f6(d)).collect::<Vec<_>>().join(", ")
        ),
    );
}

fn dominance() -> Result<CriterionOutcome, HarnessError> {
    const N: u64 = 1 << 10;
    const ALPHA: f64 = 1.3361;
    const ROUNDS: u32 = 48;
    let q1 = series_constants().q1;
    let js = j_star(N, ALPHA);
    let p_seq: Vec<f64> = (1..=ROUNDS)
        .map(|j| if j > js { q1 } else { 0.0 })
        .collect();
    let q_seq = (1..=ROUNDS)
        .map(|j| Ok(1.0 - p_round_alg1_formula(N, j, ALPHA, 1)?.s))
        .collect::<Result<Vec<f64>, HarnessError>>()?;
    let report = dominance_check(&p_seq, &q_seq, 1_000_000, SEED_DOMINANCE)?;

    let mut k = Checks::new();
    k.note(format!(
        "n = 2^10, alpha = {ALPHA}, j* = {js}: H from q1·1{{j > j*}} with q1 = {}, K from 1 - s_j",
        f6(q1)
    ));
    k.check(
        report.coupling_violations == 0,
        format!(
            "{} samples with K > H out of {}",
            report.coupling_violations, report.samples
        ),
    );
    k.check(
        report.cdf_violations.is_empty(),
        format!(
            "P(K <= k) >= P(H <= k) - 3 sigma at all {} indices (largest P(H <= k) - P(K <= k) = {})",
            report.cdf_h.len(),
            f6(report.max_cdf_gap)
        ),
    );
    k.note(format!(
        "P(H <= j*+1) = {}, P(K <= j*+1) = {}",
        f6(report.cdf_h[js as usize]),
        f6(report.cdf_k[js as usize])
    ));
    Ok(k.finish(8, "first-success dominance"))
}

/// Criterion 9 given a completed run: reruns the same criteria and compares
/// the rendered output.
pub fn check_determinism(first: &[CriterionOutcome]) -> Result<CriterionOutcome, HarnessError> {
    let ids: Vec<u32> = first.iter().map(|o| o.id).collect();
    Ok(determinism(first, &rerun(&ids)?))
}

fn determinism(first: &[CriterionOutcome], second: &[CriterionOutcome]) -> CriterionOutcome {
    let render = |o: &[CriterionOutcome]| o.iter().map(|c| c.to_string()).collect::<String>();
    let (a, b) = (render(first), render(second));
    let mut k = Checks::new();
    let ids: Vec<String> = first.iter().map(|o| format!("C{}", o.id)).collect();
    k.check(
        a == b,
        format!(
            "rerun of {} gives identical output ({} bytes)",
            ids.join(" "),
            a.len()
        ),
    );
    k.finish(9, "determinism")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_criteria_pass() {
        for id in [1, 2, 3] {
            let o = run_criterion(id).unwrap();
            assert!(o.passed, "{o}");
        }
    }

    #[test]
    fn unknown_criterion() {
        assert!(verify(&[10]).is_err());
        assert!(run_criterion(9).is_err());
    }

    #[test]
    fn determinism_rerun_of_selection() {
        let r = verify(&[9, 1, 3]).unwrap();
        let ids: Vec<u32> = r.outcomes.iter().map(|o| o.id).collect();
        assert_eq!(ids, [1, 3, 9]);
        assert!(r.passed());
        assert!(r.to_string().ends_with("all 3 criteria passed\n"));
    }
}
