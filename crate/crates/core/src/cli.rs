//! Command-line front end: argument parsing, table output and exit codes.

use crate::analysis::{
    c_of_alpha, exact_round_success_alg1_collapsed, exact_round_success_alg2, j_star,
    optimal_alpha, p_round_alg1_formula, p_round_alg2_formula, series_constants,
    MAX_ALG2_DP_STATIONS,
};
use crate::harness::{run_trial_records, sweep_with, TrialConfig, TrialStats};
use crate::numeric::format_sig6;
use crate::protocol::{round_length, Protocol, ProtocolParams};
use crate::verify::{verify, ALL_CRITERIA};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Help or version text requested; not a failure.
    #[error("{0}")]
    Info(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => EXIT_OK,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolArg {
    Alg1,
    Alg2,
}

impl From<ProtocolArg> for Protocol {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Alg1 => Protocol::Candidate,
            ProtocolArg::Alg2 => Protocol::Witness,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "radio-elect",
    version,
    about = "Energy-efficient leader election in single-hop radio networks without collision detection"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// alg1 (strong no-CD) or alg2 (weak no-CD).
    #[arg(long, value_enum, default_value = "alg1")]
    protocol: ProtocolArg,
    /// Wake exponent of a round's first slot.
    #[arg(long, default_value_t = 1)]
    k_start: u32,
    #[arg(long, default_value_t = ProtocolParams::DEFAULT_MAX_ROUNDS)]
    max_rounds: u32,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Run repeated elections; one row per trial, or one summary row.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        n: usize,
        /// Round growth factor; defaults to 1.3361 for alg1 and 1.3295 for alg2.
        #[arg(long)]
        alpha: Option<f64>,
        /// Print the aggregated statistics instead of per-trial rows.
        #[arg(long)]
        summary: bool,
    },
    /// Analytic quantities.
    Analyze {
        #[command(subcommand)]
        what: AnalyzeArgs,
    },
    /// Simulate every (n, alpha) pair and compare with the predictions.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated network sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Comma-separated alpha values; defaults to the protocol's optimum.
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
    },
    /// Run the reproduction suite; exits with status 3 if any criterion fails.
    Verify {
        /// Comma-separated criterion numbers (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u32>,
    },
}

#[derive(Debug, Subcommand)]
enum AnalyzeArgs {
    /// Series constants and the derived per-round bounds.
    Constants,
    /// The cost constant c_q(alpha) over its domain, and its minimum.
    Cost {
        #[arg(long)]
        q: f64,
        /// Number of curve samples.
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// Per-round probabilities: closed forms and exact values.
    Rounds {
        #[arg(long, value_enum, default_value = "alg1")]
        protocol: ProtocolArg,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 1)]
        k_start: u32,
        #[arg(long, default_value_t = 20)]
        rounds: u32,
    },
}

/// Validated command.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Simulate {
        params: ProtocolParams,
        n: usize,
        trials: u64,
        seed: u64,
        summary: bool,
    },
    AnalyzeConstants,
    AnalyzeCost {
        q: f64,
        points: usize,
    },
    AnalyzeRounds {
        params: ProtocolParams,
        n: u64,
        rounds: u32,
    },
    Sweep {
        params: ProtocolParams,
        n_values: Vec<usize>,
        alpha_values: Vec<f64>,
        trials: u64,
        seed: u64,
    },
    Verify {
        criteria: Vec<u32>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub command: Command,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn params_from(run: &RunArgs, alpha: Option<f64>) -> Result<ProtocolParams, CliError> {
    let protocol = Protocol::from(run.protocol);
    let alpha = alpha.unwrap_or(protocol.default_alpha());
    check_alpha(alpha)?;
    let params = ProtocolParams::new(protocol, alpha)
        .with_k_start(run.k_start)
        .with_max_rounds(run.max_rounds);
    params.validate().map_err(|e| usage(e.to_string()))?;
    Ok(params)
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha.is_finite() && alpha > 1.0 {
        Ok(())
    } else {
        Err(usage(format!(
            "--alpha must be a number greater than 1, got {alpha}"
        )))
    }
}

fn check_n(n: u64) -> Result<(), CliError> {
    if n >= 2 {
        Ok(())
    } else {
        Err(usage(format!("--n must be at least 2, got {n}")))
    }
}

fn check_trials(trials: u64) -> Result<(), CliError> {
    if trials >= 1 {
        Ok(())
    } else {
        Err(usage("--trials must be at least 1"))
    }
}

/// Parses and validates the arguments that follow the program name.
pub fn parse_args<I, S>(argv: I) -> Result<CliConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = std::iter::once("radio-elect".into()).chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args).map_err(|e| {
        use clap::error::ErrorKind;
        let text = e.render().to_string();
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(text),
            _ => CliError::Usage(text),
        }
    })?;

    let command = match cli.command {
        CommandArgs::Simulate {
            run,
            n,
            alpha,
            summary,
        } => {
            check_n(n as u64)?;
            check_trials(run.trials)?;
            Command::Simulate {
                params: params_from(&run, alpha)?,
                n,
                trials: run.trials,
                seed: run.seed,
                summary,
            }
        }
        CommandArgs::Analyze { what } => match what {
            AnalyzeArgs::Constants => Command::AnalyzeConstants,
            AnalyzeArgs::Cost { q, points } => {
                if !(q > 0.0 && q <= 1.0) {
                    return Err(usage(format!("--q must lie in (0, 1], got {q}")));
                }
                if points == 0 {
                    return Err(usage("--points must be at least 1"));
                }
                Command::AnalyzeCost { q, points }
            }
            AnalyzeArgs::Rounds {
                protocol,
                n,
                alpha,
                k_start,
                rounds,
            } => {
                check_n(n)?;
                let run = RunArgs {
                    protocol,
                    k_start,
                    max_rounds: rounds.max(1),
                    trials: 1,
                    seed: 0,
                };
                Command::AnalyzeRounds {
                    params: params_from(&run, alpha)?,
                    n,
                    rounds,
                }
            }
        },
        CommandArgs::Sweep { run, n, alpha } => {
            for &v in &n {
                check_n(v as u64)?;
            }
            check_trials(run.trials)?;
            let params = params_from(&run, None)?;
            let alpha_values = if alpha.is_empty() {
                vec![params.alpha]
            } else {
                alpha
            };
            for &a in &alpha_values {
                check_alpha(a)?;
            }
            Command::Sweep {
                params,
                n_values: n,
                alpha_values,
                trials: run.trials,
                seed: run.seed,
            }
        }
        CommandArgs::Verify { criteria } => {
            if let Some(bad) = criteria.iter().find(|c| !ALL_CRITERIA.contains(c)) {
                return Err(usage(format!(
                    "no criterion {bad}; criteria are numbered 1 to 9"
                )));
            }
            Command::Verify {
                criteria: if criteria.is_empty() {
                    ALL_CRITERIA.to_vec()
                } else {
                    criteria
                },
            }
        }
    };
    Ok(CliConfig {
        command,
        format: cli.format,
        output: cli.output,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Missing, Into::into)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_sig6(*x),
            Cell::Int(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        use serde_json::Value;
        match self {
            Cell::Num(x) => format_sig6(*x)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or(Value::Null, Value::Number),
            Cell::Int(x) => Value::from(*x),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Missing => Value::Null,
        }
    }
}

struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn write(&self, format: OutputFormat, out: &mut dyn Write) -> Result<(), CliError> {
        match format {
            OutputFormat::Csv => {
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(out);
                w.write_record(&self.columns).map_err(runtime)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(runtime)?;
                }
                w.flush().map_err(runtime)
            }
            OutputFormat::Json => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, v)| (c.to_string(), v.json()))
                            .collect::<serde_json::Map<_, _>>();
                        serde_json::Value::Object(obj)
                    })
                    .collect();
                serde_json::to_writer_pretty(&mut *out, &rows).map_err(runtime)?;
                writeln!(out).map_err(runtime)
            }
        }
    }
}

const SUMMARY_COLUMNS: [&str; 25] = [
    "protocol",
    "n",
    "alpha",
    "k_start",
    "trials",
    "seed",
    "termination_rate",
    "mean_rounds",
    "sd_rounds",
    "ci_rounds",
    "mean_probabilistic_slots",
    "sd_probabilistic_slots",
    "ci_probabilistic_slots",
    "mean_total_slots",
    "sd_total_slots",
    "ci_total_slots",
    "mean_awake_mean",
    "sd_awake_mean",
    "ci_awake_mean",
    "mean_awake_max",
    "sd_awake_max",
    "ci_awake_max",
    "station_mean_awake_max",
    "round1_success_freq",
    "rounds_observed",
];

fn summary_row(params: &ProtocolParams, n: usize, seed: u64, s: &TrialStats) -> Vec<Cell> {
    let mut row: Vec<Cell> = vec![
        params.protocol.name().into(),
        n.into(),
        params.alpha.into(),
        params.k_start.into(),
        s.trials.into(),
        seed.into(),
        s.termination_rate.into(),
    ];
    for e in [
        s.rounds,
        s.probabilistic_slots,
        s.total_slots,
        s.awake_mean,
        s.awake_max,
    ] {
        row.extend([e.mean.into(), e.stddev.into(), e.half_width.into()]);
    }
    row.extend([
        s.station_mean_awake_max.into(),
        s.round1_success_freq.into(),
        s.per_round_attempts.len().into(),
    ]);
    row
}

fn simulate(
    params: ProtocolParams,
    n: usize,
    trials: u64,
    seed: u64,
    summary: bool,
) -> Result<Table, CliError> {
    let config = TrialConfig::new(params, n, trials, seed);
    let (stats, records) = run_trial_records(&config).map_err(runtime)?;
    if summary {
        let mut t = Table::new(&SUMMARY_COLUMNS);
        t.push(summary_row(&params, n, seed, &stats));
        return Ok(t);
    }
    let mut t = Table::new(&[
        "trial",
        "seed",
        "terminated",
        "leader",
        "rounds",
        "probabilistic_slots",
        "total_slots",
        "awake_mean",
        "awake_max",
    ]);
    for r in records {
        t.push(vec![
            r.trial.into(),
            r.seed.into(),
            r.terminated.into(),
            r.leader_index.into(),
            r.rounds_used.into(),
            r.probabilistic_slots.into(),
            r.total_slots.into(),
            r.awake_mean.into(),
            r.awake_max.into(),
        ]);
    }
    Ok(t)
}

fn analyze_constants() -> Table {
    let c = series_constants();
    let mut t = Table::new(&[
        "sum_s1",
        "sum_s2",
        "sum_s3",
        "sum_s4",
        "s_inf_alg1",
        "s_inf_alg2",
        "p_inf_alg1",
        "p_inf_alg2",
        "q1",
        "q2",
        "fluctuation_budget_lemma1",
        "fluctuation_budget_lemma2",
    ]);
    t.push(
        [
            c.sum_s1,
            c.sum_s2,
            c.sum_s3,
            c.sum_s4,
            c.s_inf_alg1,
            c.s_inf_alg2,
            c.p_inf_alg1,
            c.p_inf_alg2,
            c.q1,
            c.q2,
            c.fluctuation_budget_lemma1,
            c.fluctuation_budget_lemma2,
        ]
        .map(Cell::from)
        .to_vec(),
    );
    t
}

fn analyze_cost(q: f64, points: usize) -> Result<Table, CliError> {
    let (alpha_star, c_star) = optimal_alpha(q).map_err(runtime)?;
    let hi = if q >= 1.0 { 4.0 } else { 1.0 / (1.0 - q) };
    let mut t = Table::new(&["q", "alpha", "c", "alpha_max", "alpha_star", "c_star"]);
    for i in 1..=points {
        let alpha = 1.0 + (hi - 1.0) * i as f64 / (points + 1) as f64;
        let c = c_of_alpha(q, alpha).map_err(runtime)?;
        t.push(vec![
            q.into(),
            alpha.into(),
            c.into(),
            (q < 1.0).then_some(hi).into(),
            alpha_star.into(),
            c_star.into(),
        ]);
    }
    Ok(t)
}

fn analyze_rounds(params: ProtocolParams, n: u64, rounds: u32) -> Result<Table, CliError> {
    let js = j_star(n, params.alpha);
    let mut t = Table::new(&[
        "protocol",
        "n",
        "alpha",
        "round",
        "slots",
        "j_star",
        "formula_p",
        "formula_s",
        "exact_success",
    ]);
    for j in 1..=rounds {
        let Ok(slots) = round_length(j, params.alpha) else {
            break;
        };
        let (formula, exact) = match params.protocol {
            Protocol::Candidate => (
                p_round_alg1_formula(n, j, params.alpha, params.k_start),
                Some(exact_round_success_alg1_collapsed(
                    n,
                    j,
                    params.alpha,
                    params.k_start,
                )),
            ),
            Protocol::Witness => (
                p_round_alg2_formula(n, j, params.alpha, params.k_start),
                (n <= MAX_ALG2_DP_STATIONS)
                    .then(|| exact_round_success_alg2(n, j, params.alpha, params.k_start)),
            ),
        };
        let formula = formula.ok();
        let exact = exact.transpose().map_err(runtime)?;
        t.push(vec![
            params.protocol.name().into(),
            n.into(),
            params.alpha.into(),
            j.into(),
            slots.into(),
            js.into(),
            formula.map(|f| f.p).into(),
            formula.map(|f| f.s).into(),
            exact.into(),
        ]);
    }
    Ok(t)
}

fn sweep_table(
    params: ProtocolParams,
    n_values: &[usize],
    alpha_values: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Table, CliError> {
    let rows = sweep_with(n_values, alpha_values, params, trials, seed).map_err(runtime)?;
    let mut columns = SUMMARY_COLUMNS.to_vec();
    columns.extend([
        "j_star",
        "q",
        "c",
        "slot_bound",
        "awake_bound",
        "awake_ratio",
        "rounds_reference",
        "exact_rounds",
        "exact_probabilistic_slots",
        "slot_bound_holds",
        "round_checks_hold",
    ]);
    let mut t = Table::new(&columns);
    for r in rows {
        let p = ProtocolParams {
            alpha: r.alpha,
            ..params
        };
        let mut row = summary_row(&p, r.n, r.seed, &r.stats);
        row.extend([
            r.j_star.into(),
            r.q.into(),
            r.c.into(),
            r.slot_bound.into(),
            r.awake_bound.into(),
            (r.stats.station_mean_awake_max / r.awake_bound).into(),
            r.rounds_reference.into(),
            r.exact.map(|e| e.rounds).into(),
            r.exact.map(|e| e.probabilistic_slots).into(),
            r.slot_bound_holds().into(),
            r.round_checks_hold().into(),
        ]);
        t.push(row);
    }
    Ok(t)
}

/// Runs a validated command, writing its records to `out`. Returns the
/// process exit status.
pub fn execute(config: &CliConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let table = match &config.command {
        Command::Simulate {
            params,
            n,
            trials,
            seed,
            summary,
        } => simulate(*params, *n, *trials, *seed, *summary)?,
        Command::AnalyzeConstants => analyze_constants(),
        Command::AnalyzeCost { q, points } => analyze_cost(*q, *points)?,
        Command::AnalyzeRounds { params, n, rounds } => analyze_rounds(*params, *n, *rounds)?,
        Command::Sweep {
            params,
            n_values,
            alpha_values,
            trials,
            seed,
        } => sweep_table(*params, n_values, alpha_values, *trials, *seed)?,
        Command::Verify { criteria } => {
            let report = verify(criteria).map_err(runtime)?;
            write!(out, "{report}").map_err(runtime)?;
            return Ok(if report.passed() {
                EXIT_OK
            } else {
                EXIT_VERIFY
            });
        }
    };
    table.write(config.format, out)?;
    Ok(EXIT_OK)
}

/// Parses `argv` (without the program name), runs the command and returns
/// the exit status. Records go to `--output` or `stdout`; messages go to
/// `stderr`.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let result = parse_args(argv).and_then(|config| match &config.output {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| runtime(format!("cannot create {}: {e}", path.display())))?;
            let mut w = std::io::BufWriter::new(file);
            let code = execute(&config, &mut w)?;
            w.flush().map_err(runtime)?;
            Ok(code)
        }
        None => execute(&config, stdout),
    });
    match result {
        Ok(code) => code,
        Err(CliError::Info(text)) => {
            let _ = write!(stdout, "{text}");
            EXIT_OK
        }
        Err(e) => {
            let prefix = if matches!(e, CliError::Usage(_)) {
                ""
            } else {
                "error: "
            };
            let _ = writeln!(stderr, "{prefix}{}", e.to_string().trim_end());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn output(args: &[&str]) -> (i32, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(args, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn defaults() {
        let c = parse_args([
            "simulate",
            "--protocol",
            "alg1",
            "--n",
            "1024",
            "--seed",
            "42",
        ])
        .unwrap();
        let Command::Simulate {
            params,
            n,
            trials,
            seed,
            summary,
        } = c.command
        else {
            panic!("wrong command");
        };
        assert_eq!(
            (params.alpha, params.k_start, n, trials, seed),
            (1.3361, 1, 1024, 1000, 42)
        );
        assert!(!summary);
        assert_eq!(c.format, OutputFormat::Csv);
        let c = parse_args(["simulate", "--protocol", "alg2", "--n", "4"]).unwrap();
        assert!(matches!(c.command, Command::Simulate { params, .. } if params.alpha == 1.3295));
        assert_eq!(
            parse_args(["analyze", "constants"]).unwrap().command,
            Command::AnalyzeConstants
        );
    }

    #[test]
    fn usage_errors() {
        for args in [
            &["simulate", "--n", "8", "--alpha", "0.9"][..],
            &["simulate", "--n", "1"],
            &["simulate", "--n", "8", "--trials", "0"],
            &["simulate", "--n", "8", "--bogus"],
            &["verify", "--criteria", "12"],
            &["analyze", "cost", "--q", "1.5"],
        ] {
            assert!(
                matches!(parse_args(args.iter().copied()), Err(CliError::Usage(_))),
                "{args:?}"
            );
        }
        assert!(matches!(parse_args(["--help"]), Err(CliError::Info(_))));
    }

    #[test]
    fn sig6_in_both_formats() {
        let (code, csv) = output(&["analyze", "constants"]);
        assert_eq!(code, 0);
        assert!(csv.starts_with("sum_s1,sum_s2"));
        assert!(csv.lines().nth(1).unwrap().contains(",0.188209,"));
        let (_, json) = output(&["analyze", "constants", "--format", "json"]);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v[0]["s_inf_alg1"], serde_json::json!(0.188209));
    }
}
