use std::io::Write;
use std::process::{Command, Output, Stdio};

use reserve_spacing::cli::commands::{OptimizeReport, SimulateReport};
use reserve_spacing::cli::format::{parse_csv, write_csv};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reserve-spacing"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).expect("valid JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const BASE: [&str; 6] = ["--r", "0.5", "--mu", "5", "--alpha", "0.1"];

fn with_base<'a>(head: &[&'a str]) -> Vec<&'a str> {
    head.iter().copied().chain(BASE).collect()
}

#[test]
fn matrix_json_lists_stages_and_product() {
    let v = json(&run(&with_base(&[
        "matrix",
        "--d",
        "10",
        "--format",
        "json",
        "--variant",
        "full",
        "--a",
        "0.1",
        "--b",
        "0.05",
    ])));
    let names: Vec<&str> = v["matrices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["E", "L", "C", "R", "A"]);
    for m in v["matrices"].as_array().unwrap() {
        for row in m["rows"].as_array().unwrap() {
            let sum: f64 = row.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
            assert!((sum - 1.0).abs() < 1e-11);
        }
    }
    assert_eq!(v["units"]["distance"], "km");
}

#[test]
fn matrix_baseline_colonisation_row() {
    let v = json(&run(&with_base(&[
        "matrix",
        "--d",
        "10",
        "--format",
        "json",
        "--matrices",
        "C",
    ])));
    let c = &v["matrices"][0];
    assert_eq!(c["name"], "C");
    let c12 = c["rows"][1][2].as_f64().unwrap();
    assert!((c12 - (-1.0f64).exp()).abs() < 1e-12);
}

#[test]
fn zero_recruitment_is_identity() {
    let v = json(&run(&with_base(&[
        "matrix",
        "--variant",
        "recruitment",
        "--a",
        "0",
        "--d",
        "3",
        "--format",
        "json",
        "--matrices",
        "R",
    ])));
    let rows = &v["matrices"][0]["rows"];
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(rows[i][j].as_f64().unwrap(), if i == j { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn matrix_text_has_header() {
    let text = stdout(&run(&with_base(&["matrix", "--d", "10"])));
    assert!(text.starts_with("# variant=baseline d=10 km"));
    assert!(text.contains("\nA\n"));
}

#[test]
fn out_of_range_parameter_is_config_error() {
    let out = run(&["matrix", "--r", "1.5", "--mu", "5", "--alpha", "0.1", "--d", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("`r`") && msg.contains("[0, 1]"), "{msg}");
}

#[test]
fn missing_parameter_is_config_error() {
    let out = run(&["sweep", "--r", "0.5", "--mu", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("alpha"));
}

#[test]
fn unknown_config_key_rejected() {
    let out = run_with_stdin(
        &["sweep", "--config", "-"],
        r#"{"params": {"r": 0.5, "mu": 5, "alpha": 0.1, "rr": 1}}"#,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("rr"));
}

#[test]
fn missing_config_file_is_reported() {
    let out = run(&["sweep", "--config", "/nonexistent/config.json"]);
    assert_ne!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("/nonexistent/config.json"));
}

#[test]
fn incompatible_objective_rejected() {
    let out = run(&with_base(&[
        "optimize",
        "--variant",
        "full",
        "--a",
        "0.1",
        "--objective",
        "quasi_extinction_rate",
    ]));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("quasi_extinction_rate"));
}

#[test]
fn config_file_then_flags_take_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"params": {"r": 0.5, "mu": 5, "alpha": 0.1}, "d_min": 0, "d_max": 10, "n_points": 3}"#,
    )
    .unwrap();
    let csv = stdout(&run(&["sweep", "--config", path.to_str().unwrap(), "--r", "0.2"]));
    assert_eq!(
        csv,
        "series,d,value\ndefault,0,0.8\ndefault,5,0.921445151021\ndefault,10,0.954145591787\n"
    );
}

#[test]
fn preset_endpoints() {
    let fig3 = parse_csv(&stdout(&run(&["sweep", "--preset", "fig3"]))).unwrap();
    let fig5 = parse_csv(&stdout(&run(&["sweep", "--preset", "fig5"]))).unwrap();
    assert_eq!(fig3.len(), 3 * 401);
    for rec in fig3.iter().filter(|r| r.d == 0.0) {
        assert_eq!(rec.value, 1.0);
    }
    for rec in fig5.iter().filter(|r| r.d == 0.0) {
        assert_eq!(rec.value, 0.5);
    }
    // Colonisation decays and shared catastrophes fade with distance.
    for series in [&fig3, &fig5] {
        for w in series.windows(2).filter(|w| w[0].series == w[1].series) {
            assert!(w[1].value <= w[0].value);
        }
    }
}

#[test]
fn csv_round_trip_is_byte_identical() {
    for preset in ["fig6", "fig8", "fig9"] {
        let csv = stdout(&run(&["sweep", "--preset", preset]));
        assert_eq!(write_csv(&parse_csv(&csv).unwrap()), csv);
    }
}

#[test]
fn optimize_hump_and_ordering() {
    let v = json(&run(&["optimize", "--preset", "fig6"]));
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 3);
    let star = |i: usize| reports[i]["d_star"].as_f64().unwrap();
    assert_eq!(reports[0]["plateau"], false);
    assert_eq!(reports[1]["plateau"], false);
    assert!(star(0) < star(1));
    assert!((star(0) - 11.19).abs() < 0.01, "{}", star(0));
}

#[test]
fn optimize_single_run_is_object() {
    let v = json(&run(&with_base(&["optimize"])));
    assert!(v.is_object());
    assert_eq!(v["objective"], "quasi_extinction_rate");
    assert!(v["d_max"].as_f64().unwrap() >= 100.0);
}

#[test]
fn certain_recruitment_plateaus_at_lower_bound() {
    let v = json(&run(&with_base(&[
        "optimize",
        "--variant",
        "recruitment",
        "--a",
        "1",
        "--d-min",
        "2",
        "--d-max",
        "30",
    ])));
    assert_eq!(v["plateau"], true);
    assert_eq!(v["d_star"].as_f64().unwrap(), 2.0);
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn json_round_trip_is_byte_identical() {
    let text = stdout(&run(&["optimize", "--preset", "fig8"]));
    let reports: Vec<OptimizeReport> = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&reports).unwrap() + "\n", text);

    let args = with_base(&[
        "simulate",
        "--variant",
        "full",
        "--a",
        "0.1",
        "--b",
        "0.05",
        "--d",
        "4",
        "--horizon",
        "6",
        "--seed",
        "2",
        "--n-reps",
        "5000",
    ]);
    let text = stdout(&run(&args));
    let report: SimulateReport = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);
}

#[test]
fn simulate_zero_horizon_is_certain_survival() {
    let v = json(&run(&with_base(&[
        "simulate",
        "--d",
        "5",
        "--horizon",
        "0",
        "--seed",
        "1",
        "--n-reps",
        "1000",
    ])));
    assert_eq!(v["survival"]["estimate"]["mean"].as_f64().unwrap(), 1.0);
    assert_eq!(v["survival"]["z"].as_f64().unwrap(), 0.0);
    assert_eq!(v["initial_is_default"], true);
}

#[test]
fn simulate_one_step_at_zero_distance() {
    let v = json(&run(&with_base(&[
        "simulate",
        "--d",
        "0",
        "--horizon",
        "1",
        "--seed",
        "3",
        "--n-reps",
        "200000",
    ])));
    assert_eq!(v["survival"]["analytic"].as_f64().unwrap(), 0.5);
    assert!(v["survival"]["z"].as_f64().unwrap().abs() < 4.0);
}

#[test]
fn simulate_is_reproducible() {
    let args = with_base(&[
        "simulate",
        "--d",
        "7",
        "--horizon",
        "10",
        "--seed",
        "42",
        "--n-reps",
        "20000",
    ]);
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
}

#[test]
fn simulate_stationary_mode() {
    let v = json(&run(&with_base(&[
        "simulate",
        "--variant",
        "full",
        "--a",
        "0.1",
        "--b",
        "0.05",
        "--d",
        "10",
        "--mode",
        "stationary",
        "--seed",
        "9",
        "--n-reps",
        "20000",
        "--burn-in",
        "300",
    ])));
    let states = v["stationary"].as_array().unwrap();
    assert_eq!(states.len(), 3);
    for s in states {
        assert!(s["z"].as_f64().unwrap().abs() < 3.0, "{s}");
    }
}

#[test]
fn simulate_requires_seed() {
    let out = run(&with_base(&["simulate", "--d", "5", "--horizon", "3"]));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("seed"));
}

#[test]
fn stationary_mode_rejected_for_absorbing_chain() {
    let out = run(&with_base(&[
        "simulate",
        "--d",
        "5",
        "--mode",
        "stationary",
        "--seed",
        "1",
    ]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let status = bin()
        .args(with_base(&["sweep", "--n-points", "5"]))
        .arg("--out")
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout(&run(&with_base(&["sweep", "--n-points", "5"]))));
}

#[test]
fn unwritable_output_is_io_error() {
    let out = run(&with_base(&[
        "sweep",
        "--n-points",
        "5",
        "--out",
        "/nonexistent/dir/out.csv",
    ]));
    assert_eq!(out.status.code(), Some(4));
}
