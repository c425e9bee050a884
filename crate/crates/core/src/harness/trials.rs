//! Repeated independent elections and their statistics.

use super::HarnessError;
use crate::numeric::combine;
use crate::protocol::{Election, ProtocolParams, RunSummary, SimError, StationCoins};
use rayon::prelude::*;

/// Environment variable overriding the number of worker threads.
pub const WORKERS_ENV: &str = "RADIO_ELECT_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub params: ProtocolParams,
    pub n: usize,
    pub trials: u64,
    pub master_seed: u64,
    /// Worker threads; `None` reads [`WORKERS_ENV`] or uses every core.
    /// Results do not depend on it.
    pub workers: Option<usize>,
}

impl TrialConfig {
    pub fn new(params: ProtocolParams, n: usize, trials: u64, master_seed: u64) -> Self {
        Self {
            params,
            n,
            trials,
            master_seed,
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.params.validate()?;
        if self.n < 2 {
            return Err(SimError::ConfigInvalid(format!(
                "an election needs at least 2 stations, got {}",
                self.n
            )));
        }
        if self.trials == 0 {
            return Err(SimError::ConfigInvalid("trials must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(SimError::ConfigInvalid("workers must be at least 1".into()));
        }
        Ok(())
    }

    fn resolved_workers(&self) -> usize {
        self.workers
            .or_else(|| std::env::var(WORKERS_ENV).ok()?.parse().ok())
            .filter(|&w| w > 0)
            .unwrap_or_else(rayon::current_num_threads)
    }
}

/// Seed of trial `index` under `master_seed`.
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    combine(master_seed, index)
}

/// Sample mean with its standard deviation and the half-width of a 95%
/// normal-approximation confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stddev: f64,
    pub half_width: f64,
}

impl Estimate {
    fn from_sums(count: u64, sums: Sums, scale: f64) -> Self {
        if count == 0 {
            return Self {
                mean: f64::NAN,
                stddev: f64::NAN,
                half_width: f64::NAN,
            };
        }
        let c = count as f64;
        let mean = sums.sum as f64 / c * scale;
        let stddev = if count > 1 {
            // Exact integer numerator of the sample variance.
            let num = count as u128 * sums.sumsq - sums.sum * sums.sum;
            (num as f64 / (c * (c - 1.0))).sqrt() * scale
        } else {
            0.0
        };
        Self {
            mean,
            stddev,
            half_width: 1.96 * stddev / c.sqrt(),
        }
    }
}

/// Statistics over a batch of trials.
///
/// Time and awake-slot estimates are taken over the trials that elected a
/// leader; the per-round frequencies count every trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialStats {
    pub trials: u64,
    pub terminated: u64,
    pub termination_rate: f64,
    pub rounds: Estimate,
    pub probabilistic_slots: Estimate,
    pub total_slots: Estimate,
    /// Per trial: awake slots averaged over the stations.
    pub awake_mean: Estimate,
    /// Per trial: awake slots of the busiest station.
    pub awake_max: Estimate,
    /// Largest per-station awake count averaged over trials.
    pub station_mean_awake_max: f64,
    pub round1_success_freq: f64,
    /// Entry `j - 1`: fraction of trials reaching round `j` that elected in it.
    pub per_round_success_freq: Vec<f64>,
    /// Entry `j - 1`: number of trials that reached round `j`.
    pub per_round_attempts: Vec<u64>,
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub rounds_used: u32,
    pub probabilistic_slots: u64,
    pub total_slots: u64,
    pub awake_mean: f64,
    pub awake_max: u32,
    pub leader_index: Option<usize>,
    pub terminated: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    sum: u128,
    sumsq: u128,
}

impl Sums {
    fn add(&mut self, x: u64) {
        self.sum += x as u128;
        self.sumsq += x as u128 * x as u128;
    }

    fn merge(&mut self, other: Sums) {
        self.sum += other.sum;
        self.sumsq += other.sumsq;
    }
}

// Integer sums only, so merging in any order gives identical results.
#[derive(Debug, Default)]
struct Accumulator {
    trials: u64,
    terminated: u64,
    rounds: Sums,
    probabilistic: Sums,
    total: Sums,
    awake_total: Sums,
    awake_max: Sums,
    /// Index `r`: trials that used `r + 1` rounds, and those that elected.
    rounds_hist: Vec<u64>,
    success_hist: Vec<u64>,
    station_awake: Vec<u64>,
    records: Vec<TrialRecord>,
}

impl Accumulator {
    fn add(&mut self, trial: u64, seed: u64, summary: &RunSummary, awake: &[u32], keep: bool) {
        self.trials += 1;
        let r = summary.rounds_used as usize;
        if self.rounds_hist.len() < r {
            self.rounds_hist.resize(r, 0);
            self.success_hist.resize(r, 0);
        }
        if r > 0 {
            self.rounds_hist[r - 1] += 1;
        }
        if summary.terminated {
            self.terminated += 1;
            self.success_hist[r - 1] += 1;
            self.rounds.add(summary.rounds_used as u64);
            self.probabilistic.add(summary.probabilistic_slots);
            self.total.add(summary.total_slots);
            self.awake_total.add(summary.awake_total);
            self.awake_max.add(summary.awake_max as u64);
            if self.station_awake.is_empty() {
                self.station_awake.resize(awake.len(), 0);
            }
            for (acc, &a) in self.station_awake.iter_mut().zip(awake) {
                *acc += a as u64;
            }
        }
        if keep {
            self.records.push(TrialRecord {
                trial,
                seed,
                rounds_used: summary.rounds_used,
                probabilistic_slots: summary.probabilistic_slots,
                total_slots: summary.total_slots,
                awake_mean: summary.awake_mean(awake.len()),
                awake_max: summary.awake_max,
                leader_index: summary.leader_index,
                terminated: summary.terminated,
            });
        }
    }

    fn merge(mut self, other: Accumulator) -> Accumulator {
        self.trials += other.trials;
        self.terminated += other.terminated;
        self.rounds.merge(other.rounds);
        self.probabilistic.merge(other.probabilistic);
        self.total.merge(other.total);
        self.awake_total.merge(other.awake_total);
        self.awake_max.merge(other.awake_max);
        for (mine, theirs) in [
            (&mut self.rounds_hist, &other.rounds_hist),
            (&mut self.success_hist, &other.success_hist),
        ] {
            if mine.len() < theirs.len() {
                mine.resize(theirs.len(), 0);
            }
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += b;
            }
        }
        if self.station_awake.is_empty() {
            self.station_awake = other.station_awake;
        } else {
            for (a, b) in self.station_awake.iter_mut().zip(&other.station_awake) {
                *a += b;
            }
        }
        self.records.extend(other.records);
        self
    }

    fn stats(&self, n: usize) -> TrialStats {
        let mut attempts = vec![0u64; self.rounds_hist.len()];
        let mut reached = 0;
        for r in (0..self.rounds_hist.len()).rev() {
            reached += self.rounds_hist[r];
            attempts[r] = reached;
        }
        let freq: Vec<f64> = attempts
            .iter()
            .zip(&self.success_hist)
            .map(|(&a, &s)| {
                if a == 0 {
                    f64::NAN
                } else {
                    s as f64 / a as f64
                }
            })
            .collect();
        let station_max = self.station_awake.iter().copied().max().unwrap_or(0);
        TrialStats {
            trials: self.trials,
            terminated: self.terminated,
            termination_rate: self.terminated as f64 / self.trials as f64,
            rounds: Estimate::from_sums(self.terminated, self.rounds, 1.0),
            probabilistic_slots: Estimate::from_sums(self.terminated, self.probabilistic, 1.0),
            total_slots: Estimate::from_sums(self.terminated, self.total, 1.0),
            awake_mean: Estimate::from_sums(self.terminated, self.awake_total, 1.0 / n as f64),
            awake_max: Estimate::from_sums(self.terminated, self.awake_max, 1.0),
            station_mean_awake_max: if self.terminated == 0 {
                f64::NAN
            } else {
                station_max as f64 / self.terminated as f64
            },
            round1_success_freq: freq.first().copied().unwrap_or(f64::NAN),
            per_round_success_freq: freq,
            per_round_attempts: attempts,
        }
    }
}

fn run_block(
    config: &TrialConfig,
    range: std::ops::Range<u64>,
    keep: bool,
) -> Result<Accumulator, HarnessError> {
    let mut engine = Election::new(config.params, config.n)?;
    let mut acc = Accumulator::default();
    for trial in range {
        let seed = trial_seed(config.master_seed, trial);
        let summary = match engine.execute(&StationCoins::new(seed)) {
            Ok(summary) => summary,
            Err(SimError::RoundCapExceeded { metrics }) => RunSummary {
                rounds_used: metrics.rounds_used,
                probabilistic_slots: metrics.probabilistic_slots,
                total_slots: metrics.total_slots,
                leader_index: None,
                terminated: false,
                awake_total: metrics.awake_per_station.iter().map(|&a| a as u64).sum(),
                awake_max: metrics.awake_per_station.iter().copied().max().unwrap_or(0),
            },
            Err(e) => return Err(e.into()),
        };
        acc.add(trial, seed, &summary, engine.awake(), keep);
    }
    Ok(acc)
}

fn run(config: &TrialConfig, keep: bool) -> Result<Accumulator, HarnessError> {
    config.validate()?;
    let workers = config.resolved_workers();
    let blocks = (workers as u64 * 4).min(config.trials);
    let bounds = |b: u64| b * config.trials / blocks;
    let ranges: Vec<_> = (0..blocks).map(|b| bounds(b)..bounds(b + 1)).collect();

    let mut acc = if workers == 1 {
        ranges
            .into_iter()
            .map(|r| run_block(config, r, keep))
            .try_fold(Accumulator::default(), |acc, block| {
                Ok::<_, HarnessError>(acc.merge(block?))
            })?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| SimError::ConfigInvalid(format!("cannot start workers: {e}")))?;
        pool.install(|| {
            ranges
                .into_par_iter()
                .map(|r| run_block(config, r, keep))
                .try_reduce(Accumulator::default, |a, b| Ok(a.merge(b)))
        })?
    };
    acc.records.sort_by_key(|r| r.trial);
    Ok(acc)
}

/// Runs `config.trials` independent elections. Trial `i` uses seed
/// [`trial_seed`]`(master_seed, i)`, so the result is a pure function of the
/// configuration whatever the number of workers.
///
/// Trials that hit the round cap are not errors: they lower
/// `termination_rate`.
pub fn run_trials(config: &TrialConfig) -> Result<TrialStats, HarnessError> {
    Ok(run(config, false)?.stats(config.n))
}

/// Like [`run_trials`], also returning every trial's outcome in trial order.
pub fn run_trial_records(
    config: &TrialConfig,
) -> Result<(TrialStats, Vec<TrialRecord>), HarnessError> {
    let acc = run(config, true)?;
    let stats = acc.stats(config.n);
    Ok((stats, acc.records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_rejected() {
        let c = TrialConfig::new(ProtocolParams::candidate(2.0), 2, 0, 1);
        assert!(matches!(
            run_trials(&c),
            Err(HarnessError::Sim(SimError::ConfigInvalid(_)))
        ));
    }

    #[test]
    fn independent_of_workers() {
        let base = TrialConfig::new(ProtocolParams::witness(1.5), 20, 300, 9);
        let (a, ra) = run_trial_records(&base.with_workers(1)).unwrap();
        let (b, rb) = run_trial_records(&base.with_workers(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert_eq!(ra.len(), 300);
        assert!(ra.iter().enumerate().all(|(i, r)| r.trial == i as u64));
    }

    #[test]
    fn accounting_identity() {
        let c = TrialConfig::new(ProtocolParams::witness(1.5), 10, 200, 3).with_workers(1);
        let s = run_trials(&c).unwrap();
        assert_eq!(s.termination_rate, 1.0);
        let gap = s.total_slots.mean - s.probabilistic_slots.mean;
        assert!((gap - 2.0 * s.rounds.mean).abs() < 1e-9);
        assert_eq!(s.per_round_attempts[0], 200);
    }

    #[test]
    fn estimate_from_sums() {
        let mut sums = Sums::default();
        for x in [1, 2, 3, 4] {
            sums.add(x);
        }
        let e = Estimate::from_sums(4, sums, 1.0);
        assert_eq!(e.mean, 2.5);
        assert!((e.stddev - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((e.half_width - 1.96 * e.stddev / 2.0).abs() < 1e-12);
    }
}
