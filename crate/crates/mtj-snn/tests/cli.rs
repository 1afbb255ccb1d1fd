//! End-to-end tests of the command-line front end: exit codes, file
//! formats, and byte-level reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mtj-snn")
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mtj_snn_cli_{tag}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn missing_config_exits_2() {
    let dir = temp_dir("missing");
    let out = run(&dir, &["--config", "nope.toml", "retention"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn invalid_config_exits_2_with_schema_error() {
    let dir = temp_dir("invalid");
    write_config(&dir, "[run]\nseed = 1\nbanana = true\n");
    let out = run(&dir, &["--config", "run.toml", "retention"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("config"), "stderr: {err}");
}

#[test]
fn unknown_sweep_kind_exits_2() {
    let dir = temp_dir("badsweep");
    write_config(
        &dir,
        r#"
        [[sweep]]
        kind = "voltage_wobble"
        values = [1.0]
        "#,
    );
    let out = run(&dir, &["--config", "run.toml", "sweep"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn retention_writes_hashed_csv() {
    let dir = temp_dir("retention");
    write_config(
        &dir,
        r#"
        [run]
        out_dir = "out"

        [retention]
        delta_grid = [1.0, 4.6, 20.0]
        t_read_ns = 1.0
        "#,
    );
    let out = run(&dir, &["--config", "run.toml", "retention"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("out/retention/retention.csv")).unwrap();
    assert!(csv.starts_with("# config_hash="));
    let mut lines = csv.lines();
    lines.next();
    assert_eq!(lines.next().unwrap(), "delta_kbt,t_read_ns,failure_probability");
    assert_eq!(csv.lines().count(), 5);
    // delta = 4.6 row carries the 1% failure level
    let row: Vec<&str> = csv.lines().nth(3).unwrap().split(',').collect();
    let p: f64 = row[2].parse().unwrap();
    assert!((p - 0.01).abs() < 0.001);
}

#[test]
fn characterize_empty_device_list_warns_and_exits_0() {
    let dir = temp_dir("nodev");
    write_config(&dir, "[run]\nout_dir = \"out\"\n");
    let out = run(&dir, &["--config", "run.toml", "characterize"]);
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("warning"), "stderr: {err}");
}

#[test]
fn fit_command_round_trips_a_curve() {
    let dir = temp_dir("fit");
    write_config(&dir, "[run]\nout_dir = \"out\"\n");
    // Synthesize a clean logistic curve: i_bias = 5 uA, i_o = 1 uA.
    let mut csv = String::from("current_A,p_switch,n_trials\n");
    for k in 0..15 {
        let i = (k as f64 - 7.0) * 1e-6 + 5e-6;
        let p = 1.0 / (1.0 + (-(i - 5e-6) / 1e-6).exp());
        csv.push_str(&format!("{i:.12e},{p:.12e},1000\n"));
    }
    std::fs::write(dir.join("curve.csv"), csv).unwrap();
    let out = run(&dir, &["--config", "run.toml", "fit", "curve.csv"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("curve.fit.json")).unwrap())
            .unwrap();
    let i_bias = fit["i_bias_A"].as_f64().unwrap();
    let i_o = fit["i_o_A"].as_f64().unwrap();
    assert!((i_bias - 5e-6).abs() < 1e-9);
    assert!((i_o - 1e-6).abs() < 1e-9);
    assert!(fit["config_hash"].is_string());
}

#[test]
fn fit_rejects_non_spanning_curve() {
    let dir = temp_dir("fitbad");
    write_config(&dir, "");
    let mut csv = String::from("current_A,p_switch,n_trials\n");
    for k in 0..10 {
        csv.push_str(&format!("{:.3e},0.9,100\n", k as f64 * 1e-6));
    }
    std::fs::write(dir.join("flat.csv"), csv).unwrap();
    let out = run(&dir, &["--config", "run.toml", "fit", "flat.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_requires_weight_file() {
    let dir = temp_dir("noweights");
    write_config(
        &dir,
        r#"
        [network]
        weights = "does-not-exist.json"
        device = "10kbt"

        [dataset]
        kind = "synthetic"
        n_images = 4
        "#,
    );
    let out = run(&dir, &["--config", "run.toml", "simulate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_rejects_zero_time() {
    let dir = temp_dir("zerotime");
    let weights = tiny_weights_json();
    std::fs::write(dir.join("w.json"), weights).unwrap();
    write_config(
        &dir,
        r#"
        [network]
        weights = "w.json"
        device = "10kbt"

        [dataset]
        kind = "synthetic"
        n_images = 2

        [simulate]
        time_ns = 0.0
        "#,
    );
    let out = run(&dir, &["--config", "run.toml", "simulate"]);
    assert_eq!(out.status.code(), Some(2));
}

/// A minimal valid weight file (28x28 -> conv 1c5 -> pool -> full -> 10).
fn tiny_weights_json() -> String {
    let conv_w: Vec<f64> = (0..25).map(|i| 0.3 * (i as f64 * 0.7).sin()).collect();
    let full_in = 12 * 12;
    let full_w: Vec<f64> = (0..full_in * 10).map(|i| 0.1 * (i as f64 * 0.31).cos()).collect();
    serde_json::json!({
        "layers": [
            {"type": "conv", "kernel": [1, 1, 5, 5], "weights": conv_w, "bias": [0.05]},
            {"type": "subsample", "kernel": [2, 2], "weights": [], "bias": []},
            {"type": "full", "kernel": [full_in, 10], "weights": full_w, "bias": [0.0; 10]},
        ],
        "scale": 1.0,
    })
    .to_string()
}

#[test]
fn simulate_and_sweep_are_reproducible_across_runs() {
    let dir = temp_dir("repro");
    std::fs::write(dir.join("w.json"), tiny_weights_json()).unwrap();
    write_config(
        &dir,
        r#"
        [run]
        out_dir = "out"
        seed = 9

        [characterize]
        n_trials = 120
        n_points = 9

        [network]
        weights = "w.json"
        device = "10kbt"
        mode = "sync"

        [dataset]
        kind = "synthetic"
        n_images = 6

        [simulate]
        time_ns = 64.0
        n_images = 6
        target_accuracy = 0.05

        [[sweep]]
        kind = "synapse_sigma"
        values = [0.0, 10.0]
        n_mc = 2
        n_images = 4
        time_ns = 32.0
        "#,
    );
    let out = run(&dir, &["--config", "run.toml", "simulate"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let acc_path = dir.join("out/simulate");
    let first: Vec<_> = std::fs::read_dir(&acc_path)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert!(!first.is_empty());
    let accuracy_csv = first
        .iter()
        .find(|p| p.file_name().unwrap().to_str().unwrap().starts_with("accuracy"))
        .expect("accuracy csv");
    let energy_json = first
        .iter()
        .find(|p| p.file_name().unwrap().to_str().unwrap().starts_with("energy"))
        .expect("energy json");
    let acc1 = std::fs::read(accuracy_csv).unwrap();
    let e1 = std::fs::read(energy_json).unwrap();

    // Re-run: byte-identical outputs.
    let out = run(&dir, &["--config", "run.toml", "simulate"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(accuracy_csv).unwrap(), acc1);
    assert_eq!(std::fs::read(energy_json).unwrap(), e1);

    // Accuracy CSV shape: hash comment, header, data rows.
    let text = String::from_utf8(acc1).unwrap();
    assert!(text.starts_with("# config_hash="));
    assert_eq!(text.lines().nth(1).unwrap(), "time_ns,accuracy");

    // Sweep: CSV with one row per value plus header.
    let out = run(&dir, &["--config", "run.toml", "sweep"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let sweep_dir = dir.join("out/sweeps");
    let sweep_file = std::fs::read_dir(&sweep_dir).unwrap().next().unwrap().unwrap().path();
    let sweep_text = std::fs::read_to_string(&sweep_file).unwrap();
    assert_eq!(sweep_text.lines().count(), 4); // hash + header + 2 values
    let s1 = std::fs::read(&sweep_file).unwrap();
    let out = run(&dir, &["--config", "run.toml", "sweep"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&sweep_file).unwrap(), s1);
}

#[test]
fn dwell_writes_summary_and_samples() {
    let dir = temp_dir("dwell");
    write_config(
        &dir,
        r#"
        [run]
        out_dir = "out"

        [dwell]
        device = "1kbt"
        duration_ns = 2000.0
        "#,
    );
    let out = run(&dir, &["--config", "run.toml", "dwell"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/dwell/dwell_summary.json")).unwrap())
            .unwrap();
    assert!(summary["transitions"].as_u64().unwrap() >= 20);
    let occ = summary["p_occupancy"].as_f64().unwrap();
    assert!((occ - 0.5).abs() < 0.15, "occupancy {occ}");
    let csv = std::fs::read_to_string(dir.join("out/dwell/dwell_samples.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("state,dwell_s") || csv.lines().count() > 2);
}

#[test]
fn out_dir_env_variable_is_honored() {
    let dir = temp_dir("envout");
    write_config(&dir, "[retention]\ndelta_grid = [4.6]\n");
    let out = Command::new(bin())
        .current_dir(&dir)
        .env("MTJ_SNN_OUT", "env_results")
        .args(["--config", "run.toml", "retention"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.join("env_results/retention/retention.csv").exists());
}
