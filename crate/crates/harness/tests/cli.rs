use std::path::Path;
use std::process::{Command, Output};

fn vdsom(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vdsom"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const CONFIG: &str = "grid_sizes = [8]\nmap_iters = 3000\nbridge_iters = 2000\nn_train = 2000\nn_test = 300\n";

#[test]
fn pipeline_through_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("c.toml"), CONFIG).unwrap();
    let ok = |args: &[&str]| {
        let o = vdsom(d, args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        o
    };
    ok(&["--config", "c.toml", "babble", "--out", "train.csv"]);
    ok(&["--config", "c.toml", "babble", "--test", "--out", "test.csv"]);
    ok(&["--config", "c.toml", "babble", "--perturb", "stretch", "--out", "stretched.csv"]);
    let csv = std::fs::read_to_string(d.join("train.csv")).unwrap();
    assert!(csv.starts_with("theta1,theta2,X,Y\n"));
    assert_eq!(csv.lines().count(), 2001);
    assert_ne!(csv, std::fs::read_to_string(d.join("stretched.csv")).unwrap());

    ok(&["--config", "c.toml", "train", "--data", "train.csv", "--variant", "som", "--out", "maps.json"]);
    ok(&["--config", "c.toml", "bridge", "--model", "maps.json", "--data", "train.csv", "--out", "model.json"]);
    ok(&["--config", "c.toml", "eval", "--model", "model.json", "--data", "test.csv", "--out", "report.json"]);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["test_size"], 300);
    let heat = ok(&["heatmap", "--report", "report.json", "--map", "sensory"]);
    let text = String::from_utf8(heat.stdout).unwrap();
    assert_eq!(text.lines().count(), 8);
    assert!(text.lines().all(|l| l.split(',').count() == 8));
    let info = ok(&["snapshot", "model.json"]);
    let info: serde_json::Value = serde_json::from_slice(&info.stdout).unwrap();
    assert_eq!(info["schema_version"], 1);
    assert_eq!(info["variant"]["kind"], "som");

    // Evaluating maps whose bridge was never trained fails at evaluation.
    let o = vdsom(d, &["--config", "c.toml", "eval", "--model", "maps.json"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("evaluate stage"), "{}", stderr(&o));

    ok(&["--config", "c.toml", "--set", "scenario=shorten", "scenario", "--out", "runs"]);
    assert!(d.join("runs/shorten/8x8/adaptation.json").exists());
}

#[test]
fn errors_are_stage_labeled() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.toml"), "map_iterz = 3\n").unwrap();
    let o = vdsom(d, &["--config", "bad.toml", "babble", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("config stage") && stderr(&o).contains("map_iterz"));

    let o = vdsom(d, &["--set", "n_train=-4", "babble", "--out", "x.csv"]);
    assert!(stderr(&o).contains("config stage"), "{}", stderr(&o));

    std::fs::write(d.join("future.json"), "{\"schema_version\": 99}").unwrap();
    let o = vdsom(d, &["snapshot", "future.json"]);
    assert!(stderr(&o).contains("unsupported snapshot schema version 99"));

    std::fs::write(d.join("broken.json"), "{\"schema_version\": 1,\n \"arm\": {").unwrap();
    let o = vdsom(d, &["snapshot", "broken.json"]);
    assert!(stderr(&o).contains("snapshot stage") && stderr(&o).contains("parse error at byte"));

    let o = vdsom(d, &["eval", "--model", "missing.json"]);
    assert!(!o.status.success() && stderr(&o).contains("snapshot stage"));
}
