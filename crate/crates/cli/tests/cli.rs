//! Runs every subcommand twice on a small dataset and compares outputs
//! byte for byte.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn scarcemol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scarcemol")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = scarcemol(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Runs `make_args(out_dir)` in two fresh directories and asserts each named
/// output file is identical across the runs.
fn twice_identical(files: &[&str], make_args: impl Fn(&Path) -> Vec<String>) -> Vec<Vec<u8>> {
    let runs: Vec<(tempfile::TempDir, Vec<Vec<u8>>)> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let args = make_args(dir.path());
            ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
            let bytes = files.iter().map(|f| fs::read(dir.path().join(f)).unwrap()).collect();
            (dir, bytes)
        })
        .collect();
    for (k, f) in files.iter().enumerate() {
        assert!(!runs[0].1[k].is_empty(), "{f} is empty");
        assert_eq!(runs[0].1[k], runs[1].1[k], "{f} differs between runs");
    }
    runs.into_iter().next().unwrap().1
}

#[test]
fn fingerprint_writes_a_binary_matrix() {
    let data = fixture("mini.csv");
    let out = twice_identical(&["fp.csv"], |d| {
        ["fingerprint", "--dataset", s(&data), "--diameter", "4", "--bits", "256", "--out", s(&d.join("fp.csv"))]
            .map(String::from)
            .to_vec()
    });
    let text = String::from_utf8(out[0].clone()).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|r| r.split(',').count() == 256));
    assert!(rows.iter().all(|r| r.split(',').all(|v| v == "0" || v == "1")));
}

#[test]
fn classify_is_reproducible() {
    let data = fixture("mini.csv");
    let out = twice_identical(&["pred.csv", "summary.json"], |d| {
        [
            "classify",
            "--dataset",
            s(&data),
            "--labeled-fraction",
            "0.2",
            "--split",
            "2",
            "--seed",
            "7",
            "--neighbors",
            "5",
            "--n-eigs",
            "8",
            "--out",
            s(&d.join("pred.csv")),
            "--json",
            s(&d.join("summary.json")),
        ]
        .map(String::from)
        .to_vec()
    });
    let text = String::from_utf8(out[0].clone()).unwrap();
    assert!(text.starts_with("index,label,labeled,predicted,p0,p1\n"));
    assert_eq!(text.lines().count(), 41);
    let summary: serde_json::Value = serde_json::from_slice(&out[1]).unwrap();
    assert_eq!(summary["labeled_count"], 8);
    assert!(summary["auc"].is_number());
}

#[test]
fn experiment_is_reproducible() {
    let config = fixture("mini.toml");
    let out = twice_identical(&["result.json", "result.csv"], |d| {
        ["experiment", "--config", s(&config), "--out", s(&d.join("result.json"))].map(String::from).to_vec()
    });
    let result: serde_json::Value = serde_json::from_slice(&out[0]).unwrap();
    assert_eq!(result["configurations"].as_array().unwrap().len(), 8);
    assert_eq!(result["num_splits"], 5);
    assert!(result.get("timings").is_none());
    let csv = String::from_utf8(out[1].clone()).unwrap();
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn consensus_is_reproducible() {
    let configs = tempfile::tempdir().unwrap();
    let data = fixture("mini.csv");
    for (name, diameter, n_eigs) in [("a.toml", 2, 6), ("b.toml", 4, 10)] {
        let text = format!(
            "dataset = {data:?}\nlabeled_fraction = 0.2\nnum_splits = 4\nseed = 1\n\n\
             [features]\nsource = \"ecfp\"\ndiameters = [{diameter}]\nn_bits = [512]\n\n\
             [graph]\nn_neighbors = [5]\n\n[spectral]\nn_eigs = [{n_eigs}]\n\n\
             [mbo]\nc = [10.0]\ndt = [0.5]\nn_iters = [20]\n",
            data = s(&data)
        );
        fs::write(configs.path().join(name), text).unwrap();
    }
    let (a, b) = (configs.path().join("a.toml"), configs.path().join("b.toml"));
    let out = twice_identical(&["consensus.json"], |d| {
        ["consensus", "--config-a", s(&a), "--config-b", s(&b), "--trials", "2", "--out", s(&d.join("consensus.json"))]
            .map(String::from)
            .to_vec()
    });
    let result: serde_json::Value = serde_json::from_slice(&out[0]).unwrap();
    assert_eq!(result["per_trial"].as_array().unwrap().len(), 2);
}

#[test]
fn rs_metrics_are_reproducible() {
    let data = fixture("mini.csv");
    let out = twice_identical(&["rs.csv", "rs.json"], |d| {
        [
            "metrics",
            "rs",
            "--dataset",
            s(&data),
            "--bits",
            "512",
            "--out",
            s(&d.join("rs.csv")),
            "--json",
            s(&d.join("rs.json")),
        ]
        .map(String::from)
        .to_vec()
    });
    let summary: serde_json::Value = serde_json::from_slice(&out[1]).unwrap();
    assert_eq!(summary["predictions_are_fallback"], true);
    for key in ["ri", "si", "rsi"] {
        let v = summary[key].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v), "{key} = {v}");
    }
    assert!(String::from_utf8(out[0].clone())
        .unwrap()
        .starts_with("index,true_class,predicted_class,residue,similarity\n"));
}

#[test]
fn rs_metrics_read_classify_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("mini.csv");
    let pred = dir.path().join("pred.csv");
    ok(&[
        "classify",
        "--dataset",
        s(&data),
        "--labeled-fraction",
        "0.2",
        "--neighbors",
        "5",
        "--n-eigs",
        "8",
        "--out",
        s(&pred),
    ]);
    let json = dir.path().join("rs.json");
    ok(&[
        "metrics",
        "rs",
        "--dataset",
        s(&data),
        "--predictions",
        s(&pred),
        "--out",
        s(&dir.path().join("rs.csv")),
        "--json",
        s(&json),
    ]);
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(json).unwrap()).unwrap();
    assert_eq!(summary["predictions_are_fallback"], false);
}

#[test]
fn failures_set_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let out = scarcemol(&["fingerprint", "--dataset", s(&missing), "--out", s(&dir.path().join("fp.csv"))]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("missing.csv"), "{stderr}");

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "dataset = \"x.csv\"\nlabeled_fraction = 2.0\n").unwrap();
    let out = scarcemol(&["experiment", "--config", s(&bad), "--out", s(&dir.path().join("r.json"))]);
    assert_eq!(out.status.code(), Some(1));

    assert_eq!(scarcemol(&["classify"]).status.code(), Some(2));
    assert_eq!(scarcemol(&["no-such-command"]).status.code(), Some(2));
}
