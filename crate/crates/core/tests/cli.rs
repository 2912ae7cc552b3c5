use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memristor-perceptron"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn empty_config_resolves_to_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{}");
    let out = bin(&["validate-config", "--config", &cfg, "--model", "mlp", "--gate", "xor"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let resolved: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(resolved["epochs"], 1000);
    assert_eq!(resolved["dataset_size"], 100);
    assert_eq!(resolved["n_realizations"], 100);
    assert_eq!(resolved["topology"], serde_json::json!([2, 2, 1]));
    assert_eq!(resolved["model"], "mlp");
    assert_eq!(resolved["gate"], "XOR");
}

#[test]
fn flags_override_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"learning_rate": 0.2, "epochs": 7}"#);
    let out = bin(&["validate-config", "--config", &cfg, "--learning-rate", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let resolved: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(resolved["learning_rate"], 0.5);
    assert_eq!(resolved["epochs"], 7);
}

#[test]
fn validation_errors_exit_with_one_and_distinct_messages() {
    let out = bin(&["train", "--epochs", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("epochs"));

    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"epochs_total": 3}"#, "unknown configuration key"),
        (r#"{"epochs": "three"}"#, "type mismatch"),
        (r#"{"dataset_size": -4}"#, "out of range"),
        (r#"{"learning_rate": -1}"#, "out of range for 'learning_rate'"),
    ];
    for (text, needle) in cases {
        let cfg = write_config(dir.path(), text);
        let out = bin(&["validate-config", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(1), "{text}");
        assert!(stderr(&out).contains(needle), "{text}: {}", stderr(&out));
    }

    let out = bin(&["train", "--gate", "nand"]);
    assert_eq!(out.status.code(), Some(1));
    let out = bin(&["validate-config", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    let out = bin(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("train"));
}

#[test]
fn train_writes_identical_csv_and_svg_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_string_lossy().into_owned();
    let args = [
        "train",
        "--model",
        "mlp",
        "--gate",
        "and",
        "--epochs",
        "4",
        "--realizations",
        "3",
        "--dataset-size",
        "12",
        "--svg",
        "--out",
        &out_dir,
    ];
    let out = bin(&args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read(dir.path().join("curve_mlp_and.csv")).unwrap();
    let svg = fs::read_to_string(dir.path().join("curve_mlp_and.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    let text = String::from_utf8(csv.clone()).unwrap();
    assert_eq!(text.lines().next(), Some("epoch,mean_e_total,std_e_total"));
    assert_eq!(text.lines().count(), 5);

    assert_eq!(bin(&args).status.code(), Some(0));
    assert_eq!(fs::read(dir.path().join("curve_mlp_and.csv")).unwrap(), csv);
}

#[test]
fn roc_writes_points_and_auc() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_string_lossy().into_owned();
    let out = bin(&[
        "roc",
        "--gate",
        "or",
        "--epochs",
        "20",
        "--realizations",
        "2",
        "--out",
        &out_dir,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("roc_slp_or.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "threshold,tpr,fpr");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("# auc="));
}

#[test]
fn dataset_emit_and_import() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_string_lossy().into_owned();
    let out = bin(&["dataset", "--gate", "xor", "--dataset-size", "25", "--out", &out_dir]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let path = dir.path().join("dataset_xor.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("x1,x2,label\n"));
    assert_eq!(text.lines().count(), 26);

    let p = path.to_string_lossy().into_owned();
    let ok = bin(&["dataset", "--gate", "xor", "--import", &p]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("25 valid"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x1,x2,label\n1,1,1\n").unwrap();
    let out = bin(&["dataset", "--gate", "xor", "--import", &bad.to_string_lossy()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn window_violation_is_a_runtime_error_unless_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_string_lossy().into_owned();
    let base = [
        "train",
        "--model",
        "mlp",
        "--learning-rate",
        "50",
        "--epochs",
        "2",
        "--realizations",
        "2",
        "--out",
        &out_dir,
    ];
    let out = bin(&base);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("addressing window"));

    let mut lenient = base.to_vec();
    lenient.extend(["--on-window-violation", "skip"]);
    let out = bin(&lenient);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("skipped"));
}
