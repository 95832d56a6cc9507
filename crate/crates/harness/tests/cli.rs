use std::fs;
use std::path::Path;
use std::process::Command;

use fedavo_harness::{parse_config, read_accuracy_series, run_experiment};

const QUICK: &str = r#"{
    "distribution": "noniid",
    "rounds": 3,
    "population_size": 4,
    "tuning_epochs": 1,
    "synthetic_train": 1200,
    "synthetic_test": 300,
    "synthetic_classes": 4,
    "synthetic_dims": 6,
    "num_clients": 4,
    "classes_per_client": 2,
    "shard_size": 300,
    "threshold": 0.8
}"#;

fn fedavo(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fedavo")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn quick_profile_emits_two_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &QUICK.replace("\"rounds\"", "\"seeds\": [1], \"rounds\""));
    let out = dir.path().join("out");
    let run = fedavo(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let mut files: Vec<String> =
        fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    files.sort();
    assert_eq!(files, ["fedavo_seed1.csv", "fedavo_summary.csv"]);

    let csv = fs::read_to_string(out.join("fedavo_seed1.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("round,global_accuracy,global_loss,client_id_0,local_accuracy_0,local_loss_0,eta_0,beta_0,lambda_0,epochs_0,tuning_evaluations_0,"));
    assert_eq!(header.split(',').count(), 3 + 8 * 4);
    assert_eq!(csv.lines().count(), 1 + 4);
    assert!(!csv.contains('\r'));

    let report = fedavo(&["report", "--csv", out.join("fedavo_seed1.csv").to_str().unwrap(), "--threshold", "0.01"]);
    assert!(report.status.success());
    assert!(String::from_utf8_lossy(&report.stdout).trim_end().ends_with(": 1"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), QUICK);
    let out = dir.path().join("o");
    let run = fedavo(&[
        "run",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
        "--seed-override",
        "7",
        "--algorithm",
        "fedavg",
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(out.join("fedavg_seed7.csv").exists());
    let csv = fs::read_to_string(out.join("fedavg_seed7.csv")).unwrap();
    let row1: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(row1[6..11], ["0.01", "0", "0", "5", "0"]);
}

#[test]
fn bad_inputs_fail_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"threshold": 1.5}"#);
    let run = fedavo(&["run", "--config", &config]);
    assert!(!run.status.success());
    assert!(String::from_utf8_lossy(&run.stderr).contains("threshold out of range"));

    let run = fedavo(&["run", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert!(!run.status.success());

    let config = write_config(
        dir.path(),
        r#"{"dataset": "mnist_idx", "train_images": "/nonexistent/a",
        "train_labels": "/nonexistent/b", "test_images": "/nonexistent/c", "test_labels": "/nonexistent/d"}"#,
    );
    let run = fedavo(&["run", "--config", &config, "--out", dir.path().join("x").to_str().unwrap()]);
    assert!(!run.status.success());
    assert!(String::from_utf8_lossy(&run.stderr).contains("/nonexistent/a"));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let mut cfg = parse_config(QUICK).unwrap();
        cfg.output_path = dir.path().to_path_buf();
        run_experiment(&cfg).unwrap();
    }
    for name in ["fedavo_seed1.csv", "fedavo_summary.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
}

#[test]
fn summary_matches_hand_computation() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(&QUICK.replace("\"rounds\"", "\"seeds\": [1, 2, 3], \"rounds\"")).unwrap();
    cfg.output_path = dir.path().to_path_buf();
    let summary = run_experiment(&cfg).unwrap();

    let finals: Vec<f64> = [1, 2, 3]
        .iter()
        .map(|s| read_accuracy_series(&dir.path().join(format!("fedavo_seed{s}.csv"))).unwrap().last().unwrap().1)
        .collect();
    let mean = (finals[0] + finals[1] + finals[2]) / 3.0;
    let var = finals.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / 2.0;

    let text = fs::read_to_string(dir.path().join("fedavo_summary.csv")).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "fedavo");
    assert_eq!(row[1], "3");
    assert!((row[2].parse::<f64>().unwrap() - mean).abs() < 1e-12);
    assert!((row[3].parse::<f64>().unwrap() - var.sqrt()).abs() < 1e-12);
    assert!((summary.mean_final_accuracy - mean).abs() < 1e-12);
}
