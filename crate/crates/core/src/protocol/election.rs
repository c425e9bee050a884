//! Full executions: rounds until a leader is elected or the cap trips.
//!
//! [`Election`] is the fast engine used for Monte Carlo work. It makes one
//! pass over the stations per round and keeps, for every probabilistic slot,
//! only what the channel can reveal: whether zero, one or several stations
//! sent, and who the lone sender was. [`run_reference_election`] drives the
//! same randomness through [`run_candidate_round`] and [`run_witness_round`]
//! slot by slot and produces identical metrics.

use super::rounds::{run_candidate_round, run_witness_round, RoundOutcome};
use super::schedule::{round_length, Intent, RoundPlan, RoundSchedule, StationCoins};
use super::station::StationState;
use super::{Protocol, ProtocolParams, SimError};

/// Record of one execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMetrics {
    pub rounds_used: u32,
    /// Slots spent in probabilistic phases.
    pub probabilistic_slots: u64,
    /// Probabilistic slots plus the deterministic slots closing each round.
    pub total_slots: u64,
    pub awake_per_station: Vec<u32>,
    /// Bookkeeping index of the leader; stations themselves never see it.
    pub leader_index: Option<usize>,
    pub terminated: bool,
}

/// [`RunMetrics`] without the per-station vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSummary {
    pub rounds_used: u32,
    pub probabilistic_slots: u64,
    pub total_slots: u64,
    pub leader_index: Option<usize>,
    pub terminated: bool,
    pub awake_total: u64,
    pub awake_max: u32,
}

impl RunSummary {
    pub fn awake_mean(&self, n: usize) -> f64 {
        self.awake_total as f64 / n as f64
    }
}

// Expected listeners per slot up to which listener ids are kept.
const SPARSE_LISTENERS: f64 = 32.0;

#[derive(Debug, Clone, Default)]
struct SlotTally {
    senders: u8,
    sender: u32,
    listeners: u8,
    listener: u32,
    sparse: bool,
    listener_ids: Vec<u32>,
}

impl SlotTally {
    fn reset(&mut self, sparse: bool) {
        self.senders = 0;
        self.listeners = 0;
        self.sparse = sparse;
        self.listener_ids.clear();
    }
}

/// Head-slot tally kept as bit masks in the layout of [`HeadDraw`]: which
/// slots have seen at least one and at least two stations, and the first
/// station seen in each.
#[derive(Debug, Clone)]
struct MaskTally {
    once: u64,
    twice: u64,
    first: [u32; 64],
}

impl Default for MaskTally {
    fn default() -> Self {
        Self {
            once: 0,
            twice: 0,
            first: [0; 64],
        }
    }
}

impl MaskTally {
    #[inline]
    fn add(&mut self, bits: u64, station: u32) {
        let fresh = bits & !self.once;
        self.twice |= bits & self.once;
        self.once |= bits;
        if fresh != 0 {
            for bit in BitIter(fresh) {
                self.first[bit as usize] = station;
            }
        }
    }

    fn store(
        &self,
        schedule: &RoundSchedule,
        tallies: &mut [SlotTally],
        mut put: impl FnMut(&mut SlotTally, u8, u32),
    ) {
        for bit in BitIter(schedule.head_bits()) {
            let count = (self.once >> bit & 1) as u8 + (self.twice >> bit & 1) as u8;
            let t = &mut tallies[schedule.head_position(bit) as usize - 1];
            put(t, count, self.first[bit as usize]);
        }
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u32;

    #[inline]
    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let bit = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(bit)
    }
}

/// Reusable election engine for a fixed protocol and network size.
///
/// Buffers and per-round sampling tables are kept between executions, so
/// running many trials through one engine avoids reallocating.
#[derive(Debug, Clone)]
pub struct Election {
    params: ProtocolParams,
    n: usize,
    awake: Vec<u32>,
    keys: Vec<u64>,
    tallies: Vec<SlotTally>,
    witnesses: Vec<(u32, u32)>,
    schedules: Vec<RoundSchedule>,
    sparse_listeners: f64,
}

impl Election {
    pub fn new(params: ProtocolParams, n: usize) -> Result<Self, SimError> {
        check_config(&params, n)?;
        Ok(Self {
            params,
            n,
            awake: vec![0; n],
            keys: Vec::with_capacity(n),
            tallies: Vec::new(),
            witnesses: Vec::new(),
            schedules: Vec::new(),
            sparse_listeners: SPARSE_LISTENERS,
        })
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Awake-slot counts per station at the end of the last execution.
    pub fn awake(&self) -> &[u32] {
        &self.awake
    }

    /// Runs one execution with the given randomness.
    ///
    /// On [`SimError::RoundCapExceeded`] the partial metrics are attached. A
    /// round whose length would exceed the slot budget also counts as hitting
    /// the cap.
    pub fn execute(&mut self, coins: &StationCoins) -> Result<RunSummary, SimError> {
        self.awake.fill(0);
        coins.fill_keys(self.n, &mut self.keys);
        let protocol = self.params.protocol;
        let mut summary = empty_summary();

        for round in 1..=self.params.max_rounds {
            let Some(idx) = cached_schedule(&mut self.schedules, &self.params, round)? else {
                break;
            };
            let length = self.schedules[idx].length();
            let leader = match protocol {
                Protocol::Candidate => self.candidate_round(idx),
                Protocol::Witness => self.witness_round(idx),
            };
            summary.rounds_used = round;
            summary.probabilistic_slots += length;
            summary.total_slots += length + protocol.overhead_slots();
            if let Some(leader) = leader {
                summary.leader_index = Some(leader as usize);
                summary.terminated = true;
                break;
            }
        }

        // Every station is awake in the last slot of every round.
        let closing = summary.rounds_used;
        for a in &mut self.awake {
            *a += closing;
            summary.awake_total += *a as u64;
            summary.awake_max = summary.awake_max.max(*a);
        }
        if summary.terminated {
            Ok(summary)
        } else {
            Err(SimError::RoundCapExceeded {
                metrics: Box::new(self.metrics(&summary)),
            })
        }
    }

    fn reset_tallies(&mut self, idx: usize) {
        let schedule = &self.schedules[idx];
        let eff = schedule.effective_len();
        self.tallies.resize_with(eff, SlotTally::default);
        for (i, t) in self.tallies.iter_mut().enumerate() {
            let expected = self.n as f64 * schedule.wake_probability(i as u64 + 1) / 2.0;
            t.reset(expected <= self.sparse_listeners);
        }
    }

    fn candidate_round(&mut self, idx: usize) -> Option<u32> {
        self.reset_tallies(idx);
        let schedule = &self.schedules[idx];
        let tallies = &mut self.tallies;
        let mut head = MaskTally::default();
        for (s, (&key, awake)) in self.keys.iter().zip(self.awake.iter_mut()).enumerate() {
            let s = s as u32;
            let draw = schedule.draw_head(key);
            head.add(draw.woken, s);
            let mut wakes = schedule.head_count(draw.woken);
            if schedule.has_tail(&draw) {
                schedule.draw_tail(key, &draw, |pos, _| {
                    wakes += 1;
                    let t = &mut tallies[pos as usize - 1];
                    t.senders = (t.senders + 1).min(2);
                    t.sender = s;
                });
            }
            *awake += wakes;
        }
        head.store(schedule, tallies, |t, count, first| {
            t.senders = count;
            t.sender = first;
        });

        let mut candidate = None;
        for t in tallies.iter().filter(|t| t.senders == 1) {
            match candidate {
                None => candidate = Some(t.sender),
                Some(c) if c == t.sender => {}
                Some(_) => return None,
            }
        }
        candidate
    }

    fn witness_round(&mut self, idx: usize) -> Option<u32> {
        self.reset_tallies(idx);
        let schedule = &self.schedules[idx];
        let tallies = &mut self.tallies;
        let mut sparse_head = 0u64;
        for bit in BitIter(schedule.head_bits()) {
            if tallies[schedule.head_position(bit) as usize - 1].sparse {
                sparse_head |= 1 << bit;
            }
        }
        let mut head_senders = MaskTally::default();
        let mut head_listeners = MaskTally::default();
        for (s, (&key, awake)) in self.keys.iter().zip(self.awake.iter_mut()).enumerate() {
            let s = s as u32;
            let draw = schedule.draw_head(key);
            let tx = draw.woken & !draw.listen;
            head_senders.add(tx, s);
            head_listeners.add(draw.listen, s);
            if draw.listen & sparse_head != 0 {
                for bit in BitIter(draw.listen & sparse_head) {
                    tallies[schedule.head_position(bit) as usize - 1]
                        .listener_ids
                        .push(s);
                }
            }
            let mut wakes = schedule.head_count(draw.woken);
            let mut sent = tx != 0;
            if schedule.has_tail(&draw) {
                schedule.draw_tail(key, &draw, |pos, intent| {
                    wakes += 1;
                    let t = &mut tallies[pos as usize - 1];
                    match intent {
                        Intent::Transmit => {
                            sent = true;
                            t.senders = (t.senders + 1).min(2);
                            t.sender = s;
                        }
                        Intent::Listen => {
                            t.listeners = (t.listeners + 1).min(2);
                            t.listener = s;
                            if t.sparse {
                                t.listener_ids.push(s);
                            }
                        }
                    }
                });
            }
            // A sender is awake in the first closing slot either way.
            *awake += wakes + sent as u32;
        }
        head_senders.store(schedule, tallies, |t, count, first| {
            t.senders = count;
            t.sender = first;
        });
        head_listeners.store(schedule, tallies, |t, count, first| {
            t.listeners = count;
            t.listener = first;
        });

        // Witnesses, each with the first slot it heard.
        self.witnesses.clear();
        let mut dense_slots = 0u64;
        for (i, t) in tallies.iter().enumerate() {
            if t.senders != 1 || t.listeners == 0 {
                continue;
            }
            let pos = i as u32 + 1;
            if t.listeners == 1 {
                self.witnesses.push((t.listener, pos));
            } else if t.sparse {
                self.witnesses
                    .extend(t.listener_ids.iter().map(|&l| (l, pos)));
            } else {
                dense_slots |= 1 << i;
            }
        }
        if dense_slots != 0 {
            for (s, &key) in self.keys.iter().enumerate() {
                let witnesses = &mut self.witnesses;
                schedule.sample_station(key, |pos, intent| {
                    if intent == Intent::Listen && dense_slots >> (pos - 1) & 1 == 1 {
                        witnesses.push((s as u32, pos));
                    }
                });
            }
        }
        self.witnesses.sort_unstable();
        self.witnesses.dedup_by_key(|w| w.0);

        // Witnesses that never sent are awake only to report.
        for &(w, _) in &self.witnesses {
            let mut sent = false;
            schedule.sample_station(self.keys[w as usize], |_, intent| {
                sent |= intent == Intent::Transmit;
            });
            if !sent {
                self.awake[w as usize] += 1;
            }
        }

        match self.witnesses[..] {
            [(_, pos)] => Some(tallies[pos as usize - 1].sender),
            _ => None,
        }
    }

    /// Full metrics for the execution that produced `summary`.
    pub fn metrics(&self, summary: &RunSummary) -> RunMetrics {
        RunMetrics {
            rounds_used: summary.rounds_used,
            probabilistic_slots: summary.probabilistic_slots,
            total_slots: summary.total_slots,
            awake_per_station: self.awake.clone(),
            leader_index: summary.leader_index,
            terminated: summary.terminated,
        }
    }

    pub fn run(&mut self, coins: &StationCoins) -> Result<RunMetrics, SimError> {
        let summary = self.execute(coins)?;
        Ok(self.metrics(&summary))
    }
}

fn check_config(params: &ProtocolParams, n: usize) -> Result<(), SimError> {
    params.validate()?;
    if n < 2 {
        return Err(SimError::ConfigInvalid(format!(
            "an election needs at least 2 stations, got {n}"
        )));
    }
    if n > u32::MAX as usize {
        return Err(SimError::ConfigInvalid(format!("too many stations: {n}")));
    }
    Ok(())
}

fn empty_summary() -> RunSummary {
    RunSummary {
        rounds_used: 0,
        probabilistic_slots: 0,
        total_slots: 0,
        leader_index: None,
        terminated: false,
        awake_total: 0,
        awake_max: 0,
    }
}

/// Index of the schedule for `round`, or `None` if the round would exceed
/// the slot budget.
fn cached_schedule(
    schedules: &mut Vec<RoundSchedule>,
    params: &ProtocolParams,
    round: u32,
) -> Result<Option<usize>, SimError> {
    let idx = round as usize - 1;
    while schedules.len() <= idx {
        let r = schedules.len() as u32 + 1;
        match round_length(r, params.alpha) {
            Ok(len) => schedules.push(RoundSchedule::new(r, len, params.k_start)),
            Err(SimError::Overflow { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some(idx))
}

/// Runs one election among `n` stations. Deterministic given the arguments.
pub fn run_election(params: ProtocolParams, n: usize, seed: u64) -> Result<RunMetrics, SimError> {
    Election::new(params, n)?.run(&StationCoins::new(seed))
}

/// Like [`run_election`], but station `s` uses the random stream of
/// `labels[s]`.
pub fn run_election_with_labels(
    params: ProtocolParams,
    seed: u64,
    labels: Vec<u64>,
) -> Result<RunMetrics, SimError> {
    let n = labels.len();
    Election::new(params, n)?.run(&StationCoins::with_labels(seed, labels))
}

/// Runs an election slot by slot through the channel, with every station's
/// state materialized and safety checked after each round.
///
/// Much slower than [`Election`] and meant for cross-checking it: given the
/// same coins both return the same metrics.
pub fn run_reference_election(
    params: ProtocolParams,
    n: usize,
    coins: &StationCoins,
) -> Result<(RunMetrics, Vec<StationState>), SimError> {
    check_config(&params, n)?;
    let mut keys = Vec::new();
    coins.fill_keys(n, &mut keys);
    let mut states = vec![StationState::default(); n];
    let mut schedules = Vec::new();
    let mut plan = RoundPlan::new();
    let mut summary = empty_summary();

    for round in 1..=params.max_rounds {
        let Some(idx) = cached_schedule(&mut schedules, &params, round)? else {
            break;
        };
        plan.sample(&schedules[idx], &keys);
        let report = match params.protocol {
            Protocol::Candidate => run_candidate_round(&mut states, &plan, params.model)?,
            Protocol::Witness => run_witness_round(&mut states, &plan, params.model)?,
        };
        summary.rounds_used = round;
        summary.probabilistic_slots += report.probabilistic_slots;
        summary.total_slots += report.probabilistic_slots + report.deterministic_slots;
        let leaders = states.iter().filter(|s| s.leader).count();
        if leaders > 1 {
            return Err(SimError::SafetyViolation(format!("{leaders} leaders")));
        }
        if let RoundOutcome::Elected(leader) = report.outcome {
            if let Some(s) = states.iter().position(|s| !s.knows_terminated) {
                return Err(SimError::SafetyViolation(format!(
                    "station {s} did not learn that the election ended"
                )));
            }
            summary.leader_index = Some(leader);
            summary.terminated = true;
            break;
        }
    }

    let metrics = RunMetrics {
        rounds_used: summary.rounds_used,
        probabilistic_slots: summary.probabilistic_slots,
        total_slots: summary.total_slots,
        awake_per_station: states.iter().map(|s| s.awake_slots).collect(),
        leader_index: summary.leader_index,
        terminated: summary.terminated,
    };
    if metrics.terminated {
        Ok((metrics, states))
    } else {
        Err(SimError::RoundCapExceeded {
            metrics: Box::new(metrics),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strong_election_contract() {
        let m = run_election(ProtocolParams::candidate(1.5), 16, 42).unwrap();
        assert!(m.terminated);
        assert!(m.leader_index.unwrap() < 16);
        assert_eq!(m.total_slots, m.probabilistic_slots + m.rounds_used as u64);
        let expected: u64 = (1..=m.rounds_used)
            .map(|j| round_length(j, 1.5).unwrap())
            .sum();
        assert_eq!(m.probabilistic_slots, expected);
        assert_eq!(m.awake_per_station.len(), 16);
        assert!(m.awake_per_station.iter().all(|&a| a >= m.rounds_used));
    }

    #[test]
    fn weak_election_contract() {
        for seed in 0..50 {
            let m = run_election(ProtocolParams::witness(2.0), 2, seed).unwrap();
            assert!(m.terminated);
            assert_eq!(
                m.total_slots,
                m.probabilistic_slots + 2 * m.rounds_used as u64
            );
        }
    }

    #[test]
    fn rejects_single_station() {
        for p in [ProtocolParams::candidate(1.5), ProtocolParams::witness(1.5)] {
            assert!(matches!(
                run_election(p, 1, 0),
                Err(SimError::ConfigInvalid(_))
            ));
            assert!(run_reference_election(p, 1, &StationCoins::new(0)).is_err());
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let p = ProtocolParams::witness(1.3295);
        assert_eq!(
            run_election(p, 100, 7).unwrap(),
            run_election(p, 100, 7).unwrap()
        );
    }

    #[test]
    fn round_cap_returns_partial_metrics() {
        let p = ProtocolParams::candidate(1.5)
            .with_k_start(64)
            .with_max_rounds(3);
        match run_election(p, 4, 1) {
            Err(SimError::RoundCapExceeded { metrics }) => {
                assert_eq!(metrics.rounds_used, 3);
                assert!(!metrics.terminated);
                assert_eq!(metrics.leader_index, None);
                assert_eq!(metrics.awake_per_station, vec![3; 4]);
            }
            other => panic!("expected cap, got {other:?}"),
        }
    }

    #[test]
    fn overflowing_round_trips_the_cap() {
        // Nobody ever wakes, and round 54 at alpha = 2 would exceed the budget.
        let p = ProtocolParams::witness(2.0)
            .with_k_start(65)
            .with_max_rounds(64);
        match run_election(p, 2, 0) {
            Err(SimError::RoundCapExceeded { metrics }) => assert_eq!(metrics.rounds_used, 53),
            other => panic!("expected cap, got {other:?}"),
        }
    }

    #[test]
    fn engine_reuse_matches_fresh_runs() {
        let p = ProtocolParams::candidate(1.3361);
        let mut engine = Election::new(p, 64).unwrap();
        for seed in 0..5 {
            let reused = engine.run(&StationCoins::new(seed)).unwrap();
            assert_eq!(reused, run_election(p, 64, seed).unwrap());
        }
    }

    fn agree(params: ProtocolParams, n: usize, seeds: std::ops::Range<u64>) {
        agree_with(params, n, seeds, SPARSE_LISTENERS);
    }

    fn agree_with(params: ProtocolParams, n: usize, seeds: std::ops::Range<u64>, sparse: f64) {
        let mut engine = Election::new(params, n).unwrap();
        engine.sparse_listeners = sparse;
        for seed in seeds {
            let coins = StationCoins::new(seed);
            match (
                engine.run(&coins),
                run_reference_election(params, n, &coins),
            ) {
                (Ok(fast), Ok((reference, states))) => {
                    assert_eq!(fast, reference, "n={n} seed={seed}");
                    assert_eq!(states.iter().filter(|s| s.leader).count(), 1);
                }
                (
                    Err(SimError::RoundCapExceeded { metrics: fast }),
                    Err(SimError::RoundCapExceeded { metrics: reference }),
                ) => assert_eq!(fast, reference, "n={n} seed={seed}"),
                (fast, reference) => panic!("n={n} seed={seed}: {fast:?} vs {reference:?}"),
            }
        }
    }

    #[test]
    fn fast_engine_matches_reference() {
        for n in [2, 3, 5, 17, 300] {
            agree(ProtocolParams::candidate(1.3361), n, 0..40);
            agree(ProtocolParams::witness(1.3295), n, 0..40);
            agree(ProtocolParams::witness(2.0).with_k_start(3), n, 0..10);
        }
    }

    #[test]
    fn fast_engine_matches_reference_with_dense_witness_slots() {
        // Treat every slot as crowded so listeners are recovered by rescanning.
        for n in [2, 7, 40, 1000] {
            agree_with(ProtocolParams::witness(1.3295), n, 0..30, -1.0);
        }
    }
}
