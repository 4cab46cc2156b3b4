use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn etrees(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etrees")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn classify_prints_the_profile() {
    let o = etrees(&["classify", "--preset", "uniform-plane"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["tau"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(v["kind"], "Ia");
}

#[test]
fn classify_reads_a_weights_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.txt");
    // Binary trees: ω_0 = ω_2 = 1.
    fs::write(&path, "0 1\n2 1\n").unwrap();
    let o = etrees(&["classify", "--weights", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["tau"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["span"], 2);
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(code(&etrees(&["classify", "--preset", "no-such-thing"])), 2);
    assert_eq!(code(&etrees(&["experiment", "no-such-experiment"])), 2);
    assert_eq!(code(&etrees(&["sample", "--model", "tree", "--n", "0"])), 2);
    assert_eq!(code(&etrees(&["sample", "--model", "graph", "--n", "5", "--weights", "x"])), 2);
}

#[test]
fn same_seed_same_bytes_whatever_the_threads() {
    let args = ["sample", "--model", "graph", "--n", "12", "--count", "50", "--seed", "9"];
    let a = etrees(&[&args[..], &["--threads", "1"]].concat());
    let b = etrees(&[&args[..], &["--threads", "3"]].concat());
    let c = etrees(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let d = etrees(&["sample", "--model", "graph", "--n", "12", "--count", "50", "--seed", "10"]);
    assert_ne!(a.stdout, d.stdout);
}

#[test]
fn every_model_samples_and_validates() {
    for model in ["tree", "leaf-tree", "graph", "dissection", "outerplanar", "map", "ktree"] {
        let o = etrees(&["sample", "--model", model, "--n", "9", "--count", "5", "--validate"]);
        assert_eq!(code(&o), 0, "{model}: {}", String::from_utf8_lossy(&o.stderr));
        let lines: Vec<Value> =
            String::from_utf8(o.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), 5, "{model}");
    }
}

#[test]
fn census_counts_add_up() {
    let dir = tempfile::tempdir().unwrap();
    let census = dir.path().join("census.csv");
    let out = dir.path().join("samples.jsonl");
    let o = etrees(&[
        "sample",
        "--model",
        "graph",
        "--preset",
        "graph:blocks=3",
        "--n",
        "4",
        "--count",
        "300",
        "--out",
        out.to_str().unwrap(),
        "--census",
        census.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 300);
    let text = fs::read_to_string(&census).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("code,count"));
    let total: u64 = lines.map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 300);
}

#[test]
fn experiment_exit_codes_follow_the_checks() {
    let o = etrees(&["experiment", "tv-identical", "--n", "30", "--reps", "200"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    // Ten draws cannot bring the census within 0.01 of the exact law.
    let o = etrees(&["experiment", "sampler-exactness", "--reps", "10"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn config_file_and_params_reach_the_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# small run\nn = 20\nreps=50\nk=3\n").unwrap();
    let o = etrees(&["experiment", "tv-identical", "--config", cfg.to_str().unwrap(), "--param", "k=4", "--reps", "60"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["params"]["n"], 20);
    assert_eq!(v["params"]["reps"], 60);
    assert_eq!(v["params"]["extra"]["k"], "4");
}
