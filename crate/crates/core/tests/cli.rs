use radio_elect::cli::{parse_args, CliError, Command};
use std::process::{Command as Process, Output};

fn radio_elect(args: &[&str]) -> Output {
    Process::new(env!("CARGO_BIN_EXE_radio-elect"))
        .args(args)
        .env("RADIO_ELECT_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn parse_defaults_and_errors() {
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
    assert!(matches!(c.command, Command::Simulate { params, .. } if params.alpha == 1.3361));
    assert!(matches!(
        parse_args(["simulate", "--n", "4", "--alpha", "0.9"]),
        Err(CliError::Usage(_))
    ));
    assert_eq!(
        parse_args(["analyze", "constants"]).unwrap().command,
        Command::AnalyzeConstants
    );
}

#[test]
fn constants_report() {
    let o = radio_elect(&["analyze", "constants"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|&h| h == "s_inf_alg1").unwrap();
    assert_eq!(row[col], "0.188209");
    assert!(!text.contains('\r'));
}

#[test]
fn cost_report() {
    let o = radio_elect(&["analyze", "cost", "--q", "0.6305", "--format", "json"]);
    assert!(o.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let first = &rows[0];
    assert!((first["alpha_star"].as_f64().unwrap() - 1.3361).abs() < 1e-3);
    assert!((first["c_star"].as_f64().unwrap() - 8.837).abs() < 1e-2);
}

#[test]
fn simulate_weak_model() {
    let o = radio_elect(&[
        "simulate",
        "--protocol",
        "alg2",
        "--n",
        "2",
        "--trials",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    let col = lines[0].split(',').position(|h| h == "terminated").unwrap();
    assert!(lines[1..]
        .iter()
        .all(|l| l.split(',').nth(col) == Some("true")));
}

#[test]
fn simulate_summary_json() {
    let o = radio_elect(&[
        "simulate",
        "--n",
        "64",
        "--trials",
        "50",
        "--summary",
        "--format",
        "json",
    ]);
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 1);
    assert_eq!(rows[0]["termination_rate"], 1.0);
    assert_eq!(rows[0]["alpha"], 1.3361);
}

#[test]
fn identical_command_lines_write_identical_files() {
    let dir = std::env::temp_dir().join(format!("radio-elect-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for (path, workers) in [(&a, "1"), (&b, "3")] {
        let o = Process::new(env!("CARGO_BIN_EXE_radio-elect"))
            .args([
                "sweep",
                "--n",
                "16,256",
                "--alpha",
                "1.3361,1.6",
                "--trials",
                "200",
                "--seed",
                "9",
            ])
            .args(["--output", path.to_str().unwrap()])
            .env("RADIO_ELECT_WORKERS", workers)
            .output()
            .unwrap();
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    let (a, b) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 5);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn exit_codes() {
    assert_eq!(
        radio_elect(&["simulate", "--n", "1"]).status.code(),
        Some(1)
    );
    assert_eq!(
        radio_elect(&["simulate", "--n", "8", "--alpha", "0.9"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(radio_elect(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(radio_elect(&["--help"]).status.code(), Some(0));
    let o = radio_elect(&["sweep", "--n", "16", "--alpha", "2.8", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
    let o = radio_elect(&["simulate", "--n", "4", "--output", "/nonexistent/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_exit_status() {
    let o = radio_elect(&["verify", "--criteria", "1,2,3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("C1 PASS"));
    // The finite-n bounds miss their thresholds at several sizes.
    let o = radio_elect(&["verify", "--criteria", "4"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("C4 FAIL"));
}
