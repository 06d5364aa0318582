use std::fs;
use std::process::Command;

fn psystem() -> Command {
    Command::new(env!("CARGO_BIN_EXE_psystem"))
}

#[test]
fn run_subcommand_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = psystem()
        .args(["run", "--out", out.to_str().unwrap(), "n_cells=64", "--horizon", "20"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    assert!(out.join("series.csv").exists());
    let summary = fs::read_to_string(out.join("summary.json")).unwrap();
    assert!(summary.contains("\"schema\": 1"));
}

#[test]
fn flags_take_precedence_over_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, "# lemma check\nmu=0.5 lambda=1\nt_max=100\n").unwrap();
    let out = dir.path().join("lemma");
    let status = psystem()
        .args(["lemma-check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(["mu=1", "lambda=4", "t_max=1e7"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!((v["results"]["sup_value"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
}

#[test]
fn bad_config_exits_with_two() {
    let out = psystem().args(["run", "gamma=0.9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma must exceed 1"));

    let out = psystem().args(["run", "n_cells=oops"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flag 'n_cells=oops'"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "mu=0.5\nlambda 1\n").unwrap();
    let out = psystem().args(["run", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn vacuum_and_cfl_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let code = psystem()
        .args(["run", "--out", out.to_str().unwrap(), "n_cells=32", "epsilon=0.95", "horizon=1"])
        .output()
        .unwrap()
        .status
        .code();
    assert_eq!(code, Some(3));
    let code = psystem()
        .args(["run", "--out", out.to_str().unwrap(), "n_cells=32", "dt_min=1", "horizon=1"])
        .output()
        .unwrap()
        .status
        .code();
    assert_eq!(code, Some(4));
}

#[test]
fn threshold_map_subcommand_writes_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("map");
    let status = psystem()
        .args(["threshold-map", "--out", out.to_str().unwrap(), "--workers", "2"])
        .args(["mu_grid=0.5,2", "lambda_grid=1,3", "epsilon=0.05", "n_cells=64", "horizon=200"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.split("\r\n").filter(|l| !l.is_empty()).count(), 5);
}
