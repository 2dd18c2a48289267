//! Command-line contract tests: file counts, exit codes, determinism, and
//! the verify negative control.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_descentlab"));
    cmd.env_remove("DESCENTLAB_OUT");
    cmd.env_remove("DESCENTLAB_VERIFY_FAULT");
    cmd
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("descentlab-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_spec(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const BOWL_SPEC: &str = r#"{
  "seed": 42,
  "objective": {"kind": "quadratic_bowl", "diag": [1.0, 10.0]},
  "init_sigma": 0.3,
  "target_loss": 1e-4,
  "stop": {"mode": {"max_iters": 2000}, "cap": 2000},
  "optimizers": [{"kind": "adam"}, {"kind": "mini_batch_gd", "eta": 0.01}]
}"#;

#[test]
fn run_writes_one_trace_per_optimizer_plus_summary() {
    let dir = temp_dir("files");
    let spec = write_spec(&dir, "spec.json", BOWL_SPEC);
    let out = dir.join("out");
    let status = bin()
        .args(["run", spec.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let mut names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        vec![
            "00_adam_s42.csv".to_string(),
            "01_mini_batch_gd_s42.csv".to_string(),
            "summary.csv".to_string(),
        ]
    );

    // Both optimizers reach the 1e-4 target on this bowl.
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    for line in summary.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let iters: f64 = cells[3].parse().unwrap();
        assert!(iters.is_finite(), "optimizer {} missed the target", cells[1]);
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn seed_flag_overrides_the_spec() {
    let dir = temp_dir("seed");
    let spec = write_spec(&dir, "spec.json", BOWL_SPEC);
    let out = dir.join("out");
    let status = bin()
        .args([
            "run",
            spec.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "7",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("00_adam_s7.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn out_dir_falls_back_to_the_environment_variable() {
    let dir = temp_dir("envout");
    let spec = write_spec(&dir, "spec.json", BOWL_SPEC);
    let out = dir.join("from-env");
    let status = bin()
        .args(["run", spec.to_str().unwrap()])
        .env("DESCENTLAB_OUT", out.to_str().unwrap())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("summary.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_spec_exits_2_with_line_number() {
    let dir = temp_dir("badjson");
    let spec = write_spec(&dir, "bad.json", "{\n  \"seed\": 42,\n  \"objective\": nope\n}\n");
    let output: Output = bin().args(["run", spec.to_str().unwrap()]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn semantically_invalid_spec_exits_2() {
    let dir = temp_dir("badsem");
    // negative learning rate
    let spec = write_spec(
        &dir,
        "bad.json",
        r#"{
  "seed": 1,
  "objective": {"kind": "rastrigin", "dim": 3},
  "optimizers": [{"kind": "adam", "eta": -1.0}]
}"#,
    );
    let output = bin().args(["run", spec.to_str().unwrap()]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn numeric_blowup_exits_3_and_keeps_the_partial_trace() {
    let dir = temp_dir("blowup");
    let spec = write_spec(
        &dir,
        "spec.json",
        r#"{
  "seed": 3,
  "objective": {"kind": "quadratic_bowl", "diag": [1.0, 10.0]},
  "stop": {"mode": {"max_iters": 5000}, "cap": 5000},
  "optimizers": [{"kind": "vanilla_gd", "eta": 1e160}]
}"#,
    );
    let out = dir.join("out");
    let output = bin()
        .args(["run", spec.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("00_vanilla_gd_s3"), "stderr: {stderr}");
    let trace = std::fs::read_to_string(out.join("00_vanilla_gd_s3.csv")).unwrap();
    assert!(trace.lines().count() >= 2, "partial trace should have rows");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_passes_and_prints_the_worked_values() {
    let output = bin().arg("verify").output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    for value in ["1.53", "1.41", "1.08", "0.713", "0.635", "0.446"] {
        assert!(stdout.contains(value), "missing {value} in: {stdout}");
    }
}

#[test]
fn verify_fault_injection_is_detected() {
    let output = bin()
        .arg("verify")
        .env("DESCENTLAB_VERIFY_FAULT", "hinge")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("FAIL"), "stdout: {stdout}");
}

const GADAM_SPEC: &str = r#"{
  "seed": 11,
  "objective": {"kind": "rastrigin", "dim": 5},
  "gadam": {
    "population": 2,
    "generations": 1,
    "epochs_per_generation": 25,
    "stop_threshold": 1e-12,
    "adam": {"kind": "adam", "eta": 0.02},
    "workers": 2
  }
}"#;

#[test]
fn gadam_smoke_run_completes_quickly_with_reports() {
    let dir = temp_dir("gadam");
    let spec = write_spec(&dir, "spec.json", GADAM_SPEC);
    let out = dir.join("out");
    let started = Instant::now();
    let output = bin()
        .args(["gadam", spec.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(started.elapsed().as_secs() < 5, "smoke run took too long");

    let stdout = String::from_utf8_lossy(&output.stdout);
    // one generation, g = 2, d = 5: 1 * 2 * 2 * 5 = 20 entries
    assert!(stdout.contains("comm_entries=20"), "stdout: {stdout}");
    assert!(out.join("gadam_generations.jsonl").exists());
    assert!(out.join("gadam_trace.csv").exists());
    assert!(out.join("adam_baseline_s11.csv").exists());
    let jsonl = std::fs::read_to_string(out.join("gadam_generations.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 1);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn gadam_worker_count_does_not_change_outputs() {
    let dir = temp_dir("gadamw");
    let spec = write_spec(&dir, "spec.json", GADAM_SPEC);
    let run = |out: &Path, workers: &str| -> (String, String) {
        let output = bin()
            .args([
                "gadam",
                spec.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--workers",
                workers,
            ])
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0));
        let stdout = String::from_utf8_lossy(&output.stdout).into_owned();
        let jsonl = std::fs::read_to_string(out.join("gadam_generations.jsonl")).unwrap();
        (stdout, jsonl)
    };
    let (line_1, jsonl_1) = run(&dir.join("w1"), "1");
    let (line_4, jsonl_4) = run(&dir.join("w4"), "4");
    assert_eq!(line_1, line_4);
    assert_eq!(jsonl_1, jsonl_4);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn gadam_without_its_spec_section_exits_2() {
    let dir = temp_dir("nogadam");
    let spec = write_spec(&dir, "spec.json", BOWL_SPEC);
    let output = bin().args(["gadam", spec.to_str().unwrap()]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn supervised_spec_round_trips_through_csv_dataset() {
    // Generate a blobs dataset via one spec run, then retrain from the CSV.
    let dir = temp_dir("csvdata");
    let spec = write_spec(
        &dir,
        "spec.json",
        r#"{
  "seed": 5,
  "objective": {"kind": "softmax_regression"},
  "dataset": {"kind": "blobs", "n": 40, "d_x": 3, "classes": 2, "noise": 0.4},
  "batch_size": 10,
  "stop": {"mode": {"max_iters": 200}, "cap": 200},
  "optimizers": [{"kind": "adam", "eta": 0.05}]
}"#,
    );
    let out = dir.join("out");
    let status = bin()
        .args(["run", spec.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let trace = std::fs::read_to_string(out.join("00_adam_s5.csv")).unwrap();
    let first: f64 = trace.lines().nth(1).unwrap().split(',').nth(5).unwrap().parse().unwrap();
    let last: f64 = trace.lines().last().unwrap().split(',').nth(5).unwrap().parse().unwrap();
    assert!(last < first, "training should reduce the loss: {first} -> {last}");
    std::fs::remove_dir_all(&dir).ok();
}
