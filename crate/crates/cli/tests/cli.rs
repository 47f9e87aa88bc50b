//! End-to-end CLI tests against the built binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_klr-hopfield"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn train_tiny(dir: &Path) -> std::path::PathBuf {
    let model = dir.join("model.txt");
    let out = run(&[
        "train",
        "--n",
        "16",
        "--load",
        "1.0",
        "--iters",
        "150",
        "--seed",
        "7",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    model
}

#[test]
fn train_then_retrieve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_tiny(dir.path());
    assert!(model.exists());
    klr_hopfield::model_io::load_model(&model).expect("saved model parses");

    let out = run(&[
        "retrieve",
        "--model",
        model.to_str().unwrap(),
        "--target-index",
        "1",
        "--noise",
        "0.2",
        "--scheme",
        "async",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("final overlap"), "{text}");
    assert!(text.contains("corrupted bits"), "{text}");
}

#[test]
fn missing_model_is_a_runtime_error() {
    let out = run(&["retrieve", "--model", "/nonexistent/model.txt"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&[
        "retrieve",
        "--model",
        "/nonexistent/model.txt",
        "--target-index",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["retrieve", "--model", "m", "--bogus-flag"]).status.code(), Some(1));
    // --load and --patterns are mutually exclusive.
    let out = run(&[
        "train", "--n", "8", "--load", "1.0", "--patterns", "8", "--out", "/tmp/x",
    ]);
    assert_eq!(out.status.code(), Some(1));
    // Malformed noise grid.
    let out = run(&[
        "experiment",
        "efficiency",
        "--n",
        "8",
        "--load",
        "1.0",
        "--noise-grid",
        "0.5:0.1:-1",
        "--out",
        "/tmp/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dynamics_experiment_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    let base = [
        "experiment",
        "dynamics",
        "--n",
        "14",
        "--load",
        "1.0",
        "--noise",
        "0.2",
        "--trials",
        "4",
        "--iters",
        "150",
        "--seed",
        "42",
        "--threads",
        "1",
        "--out",
    ];

    let mut args_a: Vec<&str> = base.to_vec();
    args_a.push(csv_a.to_str().unwrap());
    assert_eq!(run(&args_a).status.code(), Some(0));

    let mut args_b: Vec<&str> = base.to_vec();
    args_b.push(csv_b.to_str().unwrap());
    args_b.push("--emit-plotscript");
    assert_eq!(run(&args_b).status.code(), Some(0));

    let a = std::fs::read(&csv_a).unwrap();
    let b = std::fs::read(&csv_b).unwrap();
    assert_eq!(a, b, "same seed must reproduce the CSV byte for byte");
    assert!(dir.path().join("b.gnuplot").exists());

    let text = String::from_utf8(a).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "scheme,epoch,overlap_mean,overlap_std,energy_mean");
}

#[test]
fn stability_report_emits_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_tiny(dir.path());

    let out = run(&["stability", "--model", model.to_str().unwrap(), "--at-pattern", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.contains("neuron,margin,exact_cross,condition_satisfied,exact_satisfied"),
        "{text}"
    );

    let json_path = dir.path().join("report.json");
    let out = run(&[
        "stability",
        "--model",
        model.to_str().unwrap(),
        "--at-pattern",
        "0",
        "--format",
        "json",
        "--out",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert!(parsed["margins"].as_array().unwrap().len() == 16);
    assert!(parsed["fraction_satisfied"].is_number());

    // A state file with the wrong length is a runtime error.
    let bad_state = dir.path().join("state.txt");
    std::fs::write(&bad_state, "1 -1 1\n").unwrap();
    let out = run(&[
        "stability",
        "--model",
        model.to_str().unwrap(),
        "--state-file",
        bad_state.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
