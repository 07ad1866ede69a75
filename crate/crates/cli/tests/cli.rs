//! The `quasilocal` binary: exit codes, report files and config echo.

use std::path::Path;
use std::process::Command;

use quasilocal_cli::{Report, RunConfig};

const BIN: &str = env!("CARGO_BIN_EXE_quasilocal");

const FLAT: &str = r#"{
  "spec": { "flat_disk": { "radius": 1.0 } },
  "resolution": [16, 32],
  "methods": ["bulk", "boundary_formula"]
}"#;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn status(args: &[&str]) -> i32 {
    Command::new(BIN).args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn compute_writes_a_stable_report_whose_echo_reproduces_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "flat.json", FLAT);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        assert_eq!(status(&["compute", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());

    let report: Report = serde_json::from_str(&text).unwrap();
    assert!(report.energy.finite().unwrap().abs() <= 5e-3);
    assert_eq!(report.kernel_dim, 1);
    assert!(!report.neg_inf);
    assert!(report.runtime_seconds.is_none());

    let echo = write(dir.path(), "echo.json", &serde_json::to_string(&report.config_echo).unwrap());
    let c = dir.path().join("c.json");
    assert_eq!(status(&["compute", "--config", echo.to_str().unwrap(), "--out", c.to_str().unwrap()]), 0);
    assert_eq!(text, std::fs::read_to_string(&c).unwrap());
}

#[test]
fn runtime_is_recorded_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "flat.json", &FLAT.replace("\"resolution\"", "\"record_runtime\": true, \"resolution\""));
    let out = dir.path().join("r.json");
    assert_eq!(status(&["compute", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let report: Report = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!(report.runtime_seconds.unwrap() > 0.0);
}

#[test]
fn decreasing_conformal_factor_reports_negative_infinity() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"spec": {"conformal_flat": {"topology": {"disk": {"radius": 1.0}}, "phi": {"poly_r2": {"coeffs": [-0.5, 0.5]}}}}, "resolution": [16, 32]}"#;
    let config = write(dir.path(), "neg.json", text);
    let out = dir.path().join("r.json");
    assert_eq!(status(&["compute", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let json = std::fs::read_to_string(out).unwrap();
    assert!(json.contains("\"energy\": \"-inf\""), "{json}");
    let report: Report = serde_json::from_str(&json).unwrap();
    assert!(report.neg_inf);
}

#[test]
fn invalid_configs_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let syntax = write(dir.path(), "syntax.json", "{\n  \"spec\": ,\n}");
    let output = Command::new(BIN).args(["compute", "--config", syntax.to_str().unwrap()]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("line 2"));

    let coarse = write(dir.path(), "coarse.json", &FLAT.replace("[16, 32]", "[4, 8]"));
    assert_eq!(status(&["compute", "--config", coarse.to_str().unwrap()]), 2);

    let missing = write(dir.path(), "missing.json", &FLAT.replace("\"bulk\", ", "\"closed_form\", \"bulk\", ").replace("flat_disk\": { \"radius\": 1.0 }", "general_2d\": { \"topology\": {\"disk\": {\"radius\": 1.0}}, \"metric\": {\"axis_stretch\": {\"epsilon\": 0.1}} }"));
    assert_eq!(status(&["compute", "--config", missing.to_str().unwrap()]), 2);

    let component = write(dir.path(), "component.json", &FLAT.replace("\"resolution\"", "\"components\": [\"nowhere\"], \"resolution\""));
    assert_eq!(status(&["compute", "--config", component.to_str().unwrap()]), 2);

    assert_eq!(status(&["convergence", "--config", missing.to_str().unwrap(), "--levels", "2"]), 2);
}

#[test]
fn verify_suites_pass() {
    for suite in ["clifford", "identities"] {
        assert_eq!(status(&["verify", "--suite", suite, "--seed", "5"]), 0, "{suite}");
    }
}

#[test]
fn convergence_table_reports_orders() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"spec": {"conformal_flat": {"topology": {"disk": {"radius": 1.0}}, "phi": {"poly_r2": {"coeffs": [0.5, -0.5]}}}}, "resolution": [16, 32]}"#;
    let config = write(dir.path(), "c.json", text);
    let out = dir.path().join("t.json");
    assert_eq!(status(&["convergence", "--config", config.to_str().unwrap(), "--levels", "3", "--out", out.to_str().unwrap()]), 0);
    let rows: Vec<quasilocal_cli::ConvergenceRow> = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[2].observed_order.unwrap() >= 0.8, "{rows:?}");
}

#[test]
fn config_round_trips_through_json() {
    let c = RunConfig::parse(FLAT, "flat.json").unwrap();
    let again = RunConfig::parse(&quasilocal_cli::to_json(&c), "echo").unwrap();
    assert_eq!(c, again);
}
