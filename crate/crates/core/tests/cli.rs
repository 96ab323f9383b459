use std::fs;
use std::path::Path;
use std::process::Command;

use pachner_walk::cli::{run, sweep, RunConfig};

fn config(json: &str, out: &Path) -> RunConfig {
    RunConfig { out_dir: out.to_path_buf(), ..RunConfig::from_json(json).unwrap() }
}

#[test]
fn flat_limit_logs_no_moves() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(r#"{"alpha": 1.0, "beta": 0.0, "steps": 100}"#, dir.path());
    let outcome = run(&c).unwrap();
    assert_eq!(outcome.moves, 0);
    let log = fs::read_to_string(dir.path().join("movelog.csv")).unwrap();
    assert_eq!(log.lines().count(), 1);
    let series = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    assert_eq!(series.lines().count(), 102);
}

#[test]
fn run_emits_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        r#"{"alpha": 0.1, "steps": 100, "snapshot_every": 50, "heatmap": {"half_extent": 20, "bins": 41, "every_n_steps": 50}}"#,
        dir.path(),
    );
    run(&c).unwrap();
    for name in [
        "timeseries.csv",
        "moments.csv",
        "movelog.csv",
        "fit.json",
        "heatmap_50.csv",
        "heatmap_100.csv",
        "graph_50.json",
        "graph_100.json",
        "field_50.csv",
        "field_100.csv",
    ] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let heat = fs::read_to_string(dir.path().join("heatmap_100.csv")).unwrap();
    let rows: Vec<Vec<f64>> =
        heat.lines().map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 41);
    assert!(rows.iter().all(|r| r.len() == 41));
    let mass: f64 = rows.iter().flatten().sum();
    assert!((mass - 1.0).abs() < 1e-10);

    let graph: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("graph_100.json")).unwrap()).unwrap();
    assert!(graph["triangles"].as_array().unwrap().len() > 100);
    let fit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fit.json")).unwrap()).unwrap();
    for key in ["a", "b", "c", "tmax", "residual"] {
        assert!(fit.get(key).is_some(), "fit.json lacks {key}");
    }
}

#[test]
fn identical_configs_give_identical_bytes() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let json = r#"{"alpha": 0.05, "steps": 60, "snapshot_every": 30, "heatmap": {"half_extent": 10, "bins": 21, "every_n_steps": 20}}"#;
    run(&config(json, d1.path())).unwrap();
    run(&config(json, d2.path())).unwrap();
    let mut names: Vec<_> = fs::read_dir(d1.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 8);
    for name in names {
        let a = fs::read(d1.path().join(&name)).unwrap();
        let b = fs::read(d2.path().join(&name)).unwrap();
        assert!(a == b, "{name:?} differs");
    }
}

#[test]
fn sweep_of_flat_limit_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(r#"{"steps": 20}"#, dir.path());
    let rows = sweep(&[1.0], &c).unwrap();
    assert!(rows[0].fit.degenerate);
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,a,b,c,tmax,residual");
    assert_eq!(lines.len(), 2);
    assert!(sweep(&[0.0], &c).is_err());
}

#[test]
fn sweep_writes_one_row_per_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(r#"{"steps": 40}"#, dir.path());
    let rows = sweep(&[0.1, 0.01], &c).unwrap();
    assert_eq!(rows.len(), 2);
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(dir.path().join("alpha_1e-2").join("timeseries.csv").exists());
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pachner-walk"))
}

#[test]
fn binary_applies_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, r#"{"alpha": 0.5, "steps": 500}"#).unwrap();
    let out = dir.path().join("out");
    let status = binary()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--steps", "12", "--alpha", "1", "--beta", "0"])
        .status()
        .unwrap();
    assert!(status.success());
    let series = fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert_eq!(series.lines().count(), 14);
    assert_eq!(fs::read_to_string(out.join("movelog.csv")).unwrap().lines().count(), 1);
}

#[test]
fn binary_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let missing = binary().args(["run", "--config"]).arg(dir.path().join("nope.json")).output().unwrap();
    assert!(!missing.status.success());
    assert!(!missing.stderr.is_empty());

    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"coins": [[1,0,1,0,0,0,1,0],[1,0,0,0,0,0,1,0],[1,0,0,0,0,0,1,0],[1,0,0,0,0,0,1,0]]}"#).unwrap();
    let bad_coin = binary().args(["run", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!bad_coin.status.success());
    assert!(String::from_utf8_lossy(&bad_coin.stderr).contains("unitary"));
}
