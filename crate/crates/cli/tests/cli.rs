use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ggmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ggmix")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = ggmix(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn synth(dir: &Path) -> String {
    let data = dir.join("data.csv");
    ok(&["synth", "--paper-sim", "--seed", "3", "--out", data.to_str().unwrap()]);
    data.to_str().unwrap().to_string()
}

#[test]
fn synth_writes_data_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let data = fs::read_to_string(dir.path().join("data.csv")).unwrap();
    let labels = fs::read_to_string(dir.path().join("labels.csv")).unwrap();
    assert_eq!(data.lines().count(), 201);
    assert_eq!(data.lines().nth(1).unwrap().split(',').count(), 10);
    assert_eq!(labels.lines().filter(|l| *l == "2").count(), 100);
}

#[test]
fn fit_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    for (model, sub) in [("ihmm", "a"), ("ihmm", "b"), ("dpm", "c"), ("dpm", "d")] {
        let out = dir.path().join(sub);
        ok(&[
            "fit",
            "--model",
            model,
            "--data",
            &data,
            "--sweeps",
            "40",
            "--burnin",
            "10",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let read = |s: &str| fs::read(dir.path().join(s).join("trace_chain1.jsonl")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_eq!(read("c"), read("d"));
    assert_ne!(read("a"), read("c"));
    assert_eq!(String::from_utf8(read("a")).unwrap().lines().count(), 30);
}

#[test]
fn extra_chains_leave_the_first_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    let one = dir.path().join("one");
    let three = dir.path().join("three");
    ok(&["fit", "--data", &data, "--sweeps", "20", "--burnin", "5", "--seed", "11", "--out", one.to_str().unwrap()]);
    let out = Command::new(env!("CARGO_BIN_EXE_ggmix"))
        .args(["fit", "--data", &data, "--sweeps", "20", "--burnin", "5", "--seed", "11", "--chains", "3"])
        .args(["--out", three.to_str().unwrap()])
        .env("GGMIX_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let first = fs::read(one.join("trace_chain1.jsonl")).unwrap();
    assert_eq!(first, fs::read(three.join("trace_chain1.jsonl")).unwrap());
    assert_ne!(first, fs::read(three.join("trace_chain2.jsonl")).unwrap());
    assert!(three.join("trace_chain3.jsonl").exists());
}

#[test]
fn invalid_discount_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    let out =
        ggmix(&["fit", "--model", "dpm", "--discount", "1.5", "--data", &data, "--sweeps", "10", "--burnin", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("discount must lie in [0, 1)"));
    let out = ggmix(&["fit", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ggmix(&["fit", "--data", &data, "--sweeps", "5", "--burnin", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_data_is_a_runtime_error_with_a_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "a,b\n1,2\n3\n").unwrap();
    let out = ggmix(&["fit", "--data", path.to_str().unwrap(), "--sweeps", "10", "--burnin", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.csv:3"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"model": "pitman-yor", "sweeps": 30, "burnin": 10, "mixture": {"discount": 0.2}}"#).unwrap();
    let out = dir.path().join("fit");
    ok(&[
        "fit",
        "--config",
        cfg.to_str().unwrap(),
        "--data",
        &data,
        "--set",
        "thin=2",
        "--sweeps",
        "20",
        "--out",
        out.to_str().unwrap(),
    ]);
    let written = fs::read_to_string(out.join("config.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&written).unwrap();
    assert_eq!(v["model"], "pitman-yor");
    assert_eq!(v["sweeps"], 20);
    assert_eq!(v["thin"], 2);
    assert_eq!(v["mixture"]["discount"], 0.2);
    assert_eq!(fs::read_to_string(out.join("trace_chain1.jsonl")).unwrap().lines().count(), 5);
}

#[test]
fn summarize_writes_the_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    let fit = dir.path().join("fit");
    ok(&[
        "fit",
        "--model",
        "ihmm",
        "--data",
        &data,
        "--sweeps",
        "60",
        "--burnin",
        "20",
        "--seed",
        "2",
        "--out",
        fit.to_str().unwrap(),
    ]);
    let labels = dir.path().join("labels.csv");
    ok(&["summarize", "--dir", fit.to_str().unwrap(), "--truth", labels.to_str().unwrap(), "--per-observation"]);
    let co = fs::read_to_string(fit.join("coclustering.csv")).unwrap();
    assert_eq!(co.lines().count(), 200);
    assert!(fit.join("edges_obs200.csv").exists());
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(fit.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["retained"], 40);
    assert!(s["two_block_ari"].as_f64().unwrap() > 0.5);
    assert!(fs::read_to_string(fit.join("partition.csv")).unwrap().starts_with("observation,two_block,modal"));
}

#[test]
fn backtest_writes_three_portfolios() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("reg.csv");
    ok(&["synth", "--regimes", "--n", "40", "--segment", "10", "--seed", "1", "--out", data.to_str().unwrap()]);
    let out = dir.path().join("bt");
    ok(&[
        "backtest",
        "--data",
        data.to_str().unwrap(),
        "--start",
        "20",
        "--end",
        "30",
        "--seed",
        "4",
        "--set",
        "backtest.initial={\"sweeps\":20,\"burnin\":10,\"thin\":1}",
        "--set",
        "backtest.refit={\"sweeps\":4,\"burnin\":2,\"thin\":1}",
        "--out",
        out.to_str().unwrap(),
    ]);
    for m in ["ggm-ihmm", "full-graph-ihmm", "single-ggm"] {
        let text = fs::read_to_string(out.join(format!("portfolio_{m}.csv"))).unwrap();
        assert_eq!(text.lines().count(), 11);
        assert!(text.starts_with("t,w1,"));
    }
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("backtest.json")).unwrap()).unwrap();
    assert_eq!(s["periods"], 10);
    let out = ggmix(&["backtest", "--data", data.to_str().unwrap(), "--end", "41"]);
    assert_eq!(out.status.code(), Some(1));
}
