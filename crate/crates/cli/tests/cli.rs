use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spacelike(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spacelike"))
        .current_dir(dir)
        .env_remove("SPACELIKE_OUT_DIR")
        .args(args)
        .output()
        .unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

const HYPERBOLOID: &str =
    r#"{"domain": {"m": 2, "half_width": 1.0, "nodes": 17}, "H": 1.0, "boundary": {"kind": "hyperboloid"}}"#;
const PLANE: &str = r#"{"domain": {"m": 2, "half_width": 1.0, "nodes": 17}, "H": 0.0,
                        "boundary": {"kind": "plane", "slope": [0.3, -0.2], "offset": 0.5}}"#;

#[test]
fn codim2_seed_7_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = spacelike(tmp.path(), &["codim2", "--seed", "7", "--out", "run"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("run"));
    assert_eq!(r["pass"], true);
    assert_eq!(r["seed"], 7);
    assert!(r["result"]["max_discrepancy"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn solve_hyperboloid_converges_within_tol() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("p.json"), HYPERBOLOID).unwrap();
    let out = spacelike(tmp.path(), &["solve", "--input", "p.json", "--out", "run", "--tol", "1e-10"]);
    assert_eq!(out.status.code(), Some(0));
    let run = tmp.path().join("run");
    let r = report(&run);
    assert_eq!(r["result"]["solve"]["converged"], true);
    assert!(r["result"]["solve"]["residual_sup"].as_f64().unwrap() <= 1e-10);
    assert_eq!(r["result"]["problem"]["solver"]["tol"], 1e-10);
    // 5 h^2 with h = 1/8
    assert!(r["result"]["exact_error"].as_f64().unwrap() <= 5.0 / 64.0);
    assert!(run.join("solution.field.json").exists());
    assert!(run.join("solution.csv").exists());
    assert!(run.join("metadata.json").exists());
    assert!(!run.join(".spacelike.lock").exists());
}

#[test]
fn analyze_plane_field_is_flat() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("p.json"), PLANE).unwrap();
    let solved = spacelike(tmp.path(), &["solve", "--input", "p.json", "--out", "s", "--encoding", "binary"]);
    assert_eq!(solved.status.code(), Some(0));
    let out = spacelike(tmp.path(), &["analyze", "--input", "s/solution.field.json", "--out", "a"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("a"));
    let res = &r["result"];
    assert_eq!(res["mean_curvature"], 0.0);
    for v in [
        &res["sup_h_norm"],
        &res["mean_curvature_range"][0],
        &res["mean_curvature_range"][1],
        &res["energy_identity"]["central"],
        &res["tension"]["interior"],
        &res["ricci"]["global_min"],
    ] {
        assert!(v.as_f64().unwrap().abs() <= 1e-10, "{v}");
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["hyperbolic-selftest", "--seed", "11", "--deterministic", "--out", "run"];
    assert_eq!(spacelike(tmp.path(), &args).status.code(), Some(0));
    let first = fs::read(tmp.path().join("run/report.json")).unwrap();
    let text = fs::read(tmp.path().join("run/report.txt")).unwrap();
    assert_eq!(spacelike(tmp.path(), &args).status.code(), Some(0));
    assert_eq!(first, fs::read(tmp.path().join("run/report.json")).unwrap());
    assert_eq!(text, fs::read(tmp.path().join("run/report.txt")).unwrap());
    let meta: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run/metadata.json")).unwrap()).unwrap();
    assert!(meta["started_unix"].as_f64().unwrap() > 0.0);
}

#[test]
fn failed_check_exits_1_with_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = spacelike(tmp.path(), &["codim2", "--tol", "1e-20", "--fields", "2", "--grid", "9", "--out", "run"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&tmp.path().join("run"));
    assert_eq!(r["pass"], false);
    assert_eq!(r["config"]["overrides"]["tol"], 1e-20);
}

#[test]
fn horoball_violation_is_a_failed_check() {
    let tmp = tempfile::tempdir().unwrap();
    let out = spacelike(tmp.path(), &["rigidity-trend", "--a-list", "2", "--c", "0.9", "--out", "run"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&tmp.path().join("run"));
    assert!(r["error"].as_str().unwrap().contains("horoball"));
}

#[test]
fn schema_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.json"), r#"{"seed": 1, "colour": "red"}"#).unwrap();
    assert_eq!(spacelike(tmp.path(), &["codim2", "--config", "bad.json"]).status.code(), Some(2));
    fs::write(tmp.path().join("wrong.json"), r#"{"command": "solve"}"#).unwrap();
    assert_eq!(spacelike(tmp.path(), &["codim2", "--config", "wrong.json"]).status.code(), Some(2));
    assert_eq!(spacelike(tmp.path(), &["solve", "--out", "x"]).status.code(), Some(2));
    assert_eq!(spacelike(tmp.path(), &["codim2", "--c", "-1"]).status.code(), Some(2));
    assert_eq!(spacelike(tmp.path(), &["frobnicate"]).status.code(), Some(2));
    fs::write(tmp.path().join("p.json"), r#"{"domain": {"m": 2, "half_width": 1.0, "nodes": 9}, "H": 0.0,
        "boundary": {"kind": "plane", "slope": [0.1]}}"#)
    .unwrap();
    assert_eq!(spacelike(tmp.path(), &["solve", "--input", "p.json"]).status.code(), Some(2));
}

#[test]
fn io_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(spacelike(tmp.path(), &["solve", "--input", "missing.json"]).status.code(), Some(3));
    assert_eq!(spacelike(tmp.path(), &["codim2", "--config", "missing.json"]).status.code(), Some(3));
    fs::create_dir(tmp.path().join("busy")).unwrap();
    fs::write(tmp.path().join("busy/.spacelike.lock"), "1").unwrap();
    assert_eq!(spacelike(tmp.path(), &["hyperbolic-selftest", "--out", "busy"]).status.code(), Some(3));
}

#[test]
fn config_file_and_env_resolve() {
    let tmp = tempfile::tempdir().unwrap();
    let sub = tmp.path().join("cfg");
    fs::create_dir(&sub).unwrap();
    fs::write(sub.join("p.json"), PLANE).unwrap();
    fs::write(
        sub.join("run.json"),
        r#"{"command": "solve", "input": "p.json", "seed": 5, "out": "from-file",
            "overrides": {"grid": [9]}}"#,
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_spacelike"))
        .current_dir(tmp.path())
        .env("SPACELIKE_OUT_DIR", "from-env")
        .args(["solve", "--config", "cfg/run.json", "--seed", "6"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("from-env"));
    assert_eq!(r["seed"], 6);
    assert_eq!(r["result"]["problem"]["domain"]["nodes"], 9);
    assert!(!tmp.path().join("from-file").exists());
}
