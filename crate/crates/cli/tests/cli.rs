//! End-to-end tests of the `chen-verify` binary: flag parsing, file
//! output, exit codes for every error class.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chen-verify"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn ode_writes_csv_and_reports_drift() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trajectory.csv");
    let out = run(&["ode", "--t1", "0.3", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let contents = fs::read_to_string(&csv).unwrap();
    assert!(contents.starts_with("t,b1,lam2,first_integral\n"));
    assert!(contents.lines().count() > 100);
    let log = stderr_of(&out);
    assert!(log.contains("drift"), "log: {log}");
    assert!(log.contains("reversal"), "log: {log}");
}

#[test]
fn ode_rejects_non_canonical_lam2() {
    for bad in ["0", "-0.5", "nan"] {
        let out = run(&["ode", "--lam2", bad]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "lam2 {bad}: {}",
            stderr_of(&out)
        );
    }
}

#[test]
fn build_exports_json_samples() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("immersion.json");
    let out = run(&[
        "build",
        "--t1",
        "0.2",
        "--grid",
        "2x2x2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let samples = doc["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 8);
    assert_eq!(samples[0]["E0"].as_array().unwrap().len(), 8);
    assert!(doc["max_horizontality"].as_f64().unwrap() < 1e-6);
}

#[test]
fn build_rejects_control_cases() {
    let out = run(&["build", "--case", "perturbed-control"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
}

fn quick_verify(case: &str, path: &Path) -> Output {
    run(&[
        "verify",
        "--case",
        case,
        "--t1",
        "0.2",
        "--grid",
        "2x2x2",
        "--out",
        path.to_str().unwrap(),
    ])
}

#[test]
fn verify_construction_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = quick_verify("construction", &path);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let pass = report["pass"].as_object().unwrap();
    assert!(!pass.is_empty());
    assert!(pass.values().all(|v| v.as_bool() == Some(true)));
    assert_eq!(report["samples"].as_array().unwrap().len(), 8);
    assert!(stderr_of(&out).contains("verdict: pass"));
}

#[test]
fn verify_controls_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    for case in ["perturbed-control", "nonminimal-surface"] {
        let path = dir.path().join(format!("{case}.json"));
        let out = quick_verify(case, &path);
        assert_eq!(out.status.code(), Some(1), "{case}: {}", stderr_of(&out));
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        let pass = report["pass"].as_object().unwrap();
        assert!(pass.values().any(|v| v.as_bool() == Some(false)), "{case}");
    }
}

#[test]
fn verify_tolerance_overrides_work_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tightened.json");
    // A tolerance far below the honest residual turns a passing check red.
    let out = run(&[
        "verify",
        "--t1",
        "0.2",
        "--grid",
        "2x2x2",
        "--tol",
        "horizontality=1e-13",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr_of(&out));

    let out = run(&["verify", "--tol", "no_such_check=1.0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("unknown tolerance"));

    let out = run(&["verify", "--tol", "horizontality"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_grids_are_usage_errors() {
    for bad in ["3x3", "3x3x3x3", "0x3x3", "axbxc"] {
        let out = run(&["verify", "--grid", bad]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "grid {bad}: {}",
            stderr_of(&out)
        );
    }
    let out = run(&["verify", "--grid", "1x3x3"]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "counts below 2 must be rejected"
    );
}

#[test]
fn report_tabulates_and_propagates_failures() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("b_good.json");
    let real = dir.path().join("a_real.json");
    assert_eq!(quick_verify("construction", &good).status.code(), Some(0));
    let out = run(&[
        "verify",
        "--case",
        "real-form",
        "--grid",
        "2x2x2",
        "--out",
        real.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let csv = dir.path().join("summary.csv");
    let out = run(&[
        "report",
        good.to_str().unwrap(),
        real.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let table = String::from_utf8_lossy(&out.stdout).into_owned();
    let a = table.find("a_real.json").expect("row for a_real.json");
    let b = table.find("b_good.json").expect("row for b_good.json");
    assert!(a < b, "rows must sort by name:\n{table}");
    assert!(fs::read_to_string(&csv)
        .unwrap()
        .starts_with("report,case,"));

    // A failing report in the set turns the summary exit nonzero.
    let control = dir.path().join("c_control.json");
    assert_eq!(
        quick_verify("perturbed-control", &control).status.code(),
        Some(1)
    );
    let out = run(&["report", good.to_str().unwrap(), control.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_rejects_missing_and_empty_inputs() {
    let out = run(&["report", "/nonexistent/report.json"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    fs::write(&empty, "").unwrap();
    let out = run(&["report", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("empty.json"));
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
}
