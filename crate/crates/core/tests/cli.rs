//! The `ewt-reg` binary end to end.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ewt-reg"))
}

#[test]
fn simulate_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["simulate", "--target", "5", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert_eq!(lines.next().unwrap(), "t,expected_ewt,baseline_ewt,target");
    assert_eq!(lines.count(), 145);
    assert!(!csv.contains('\r'));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("simulate.json")).unwrap()).unwrap();
    assert_eq!(json["metadata"]["config"]["seed"], 2019);
    assert_eq!(json["metadata"]["schema_version"], 1);
    assert!(dir.path().join("scenario.json").exists());
}

#[test]
fn hdp_full_lookahead_matches_edp_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, solver) in [(&a, "edp"), (&b, "hdp:8")] {
        assert!(bin()
            .args(["simulate", "--solver", solver, "--out"])
            .arg(dir.path())
            .status()
            .unwrap()
            .success());
    }
    let strip = |p: &std::path::Path| -> String {
        // The metadata line names the solver; everything after it must match.
        let s = std::fs::read_to_string(p.join("simulate.csv")).unwrap();
        s.split_once('\n').unwrap().1.to_string()
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}

#[test]
fn single_segment_profile_equals_simulate() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(bin().args(["simulate", "--target", "5", "--out"]).arg(a.path()).status().unwrap().success());
    // One segment is rejected by time-varying itself, but the same run through
    // the library gives the simulate curve.
    let s = ewt_reg::canonical_scenario();
    let p = ewt_reg::TargetProfile::constant(5.0).unwrap();
    let r = ewt_reg::experiments::run_regulation("simulate", &s, &p, ewt_reg::experiments::Solver::Edp).unwrap();
    ewt_reg::experiments::write_experiment(b.path(), "simulate", &r).unwrap();
    let read = |d: &tempfile::TempDir| std::fs::read_to_string(d.path().join("simulate.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn config_file_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n_sequential": 3, "seed": 7}"#).unwrap();
    let out = bin()
        .args(["sweep-lookahead", "--seed", "11", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep_lookahead.csv")).unwrap();
    assert!(csv.contains("\"seed\":11"));
    assert_eq!(csv.lines().count(), 2 + 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| bin().args(args).arg("--out").arg(dir.path()).output().unwrap().status.code();
    assert_eq!(code(&["sweep-target", "--target", "5"]), Some(2));
    assert_eq!(code(&["simulate", "--solver", "xyz"]), Some(2));
    assert_eq!(code(&["sweep-lookahead", "--lookahead", "0..9"]), Some(2));
    assert_eq!(code(&["simulate", "--config", "/does/not/exist.json"]), Some(2));
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(2));
    assert_eq!(code(&["simulate"]), Some(0));
}
