//! End-to-end tests of the binary: artifact layout, determinism across
//! runs and thread counts, and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stablefield"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path
}

const SCALAR_CONFIG: &str = r#"
[exponents]
e_order = 1
e_entries = [1.25]
d_order = 1
d_entries = [0.5]

[field]
alpha = 1.5
psi = "diag"
spacing = 0.39269908169872414
radius = 12.566370614359172
resolution = 17
realizations = 3
seed = 42
"#;

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn theory_dims_emits_expected_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCALAR_CONFIG);
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "theory-dims",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("dimension_report.json")).unwrap())
            .unwrap();
    let range = json["report"]["range_dim_min_form"].as_f64().unwrap();
    let graph = json["report"]["graph_dim_min_form"].as_f64().unwrap();
    assert!((range - 1.0).abs() < 1e-12);
    assert!((graph - 1.6).abs() < 1e-12);
    assert!(json["config_hash"].as_str().unwrap().len() == 64);
}

#[test]
fn simulate_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCALAR_CONFIG);
    let mut outputs: Vec<Vec<u8>> = Vec::new();
    for (sub, threads) in [("a", "1"), ("b", "4"), ("c", "1")] {
        let out_dir = dir.path().join(sub);
        let out = run(&[
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--threads",
            threads,
            "simulate",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let mut blob = Vec::new();
        for r in 0..3 {
            blob.extend(fs::read(out_dir.join(format!("realization_{r:04}.csv"))).unwrap());
        }
        outputs.push(blob);
    }
    assert_eq!(outputs[0], outputs[1], "thread count changed the output");
    assert_eq!(outputs[0], outputs[2], "re-run changed the output");
}

#[test]
fn seed_override_changes_realizations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCALAR_CONFIG);
    let mut blobs = Vec::new();
    for (sub, seed) in [("s42", "42"), ("s43", "43")] {
        let out_dir = dir.path().join(sub);
        let out = run(&[
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            seed,
            "simulate",
        ]);
        assert!(out.status.success());
        blobs.push(fs::read(out_dir.join("realization_0000.csv")).unwrap());
    }
    assert_ne!(blobs[0], blobs[1]);
}

#[test]
fn invalid_spectrum_exits_one_and_names_condition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &SCALAR_CONFIG.replace("e_entries = [1.25]", "e_entries = [0.8]"),
    );
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "theory-dims",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("lambda_max(D) < 1 < a_min(E)"),
        "stderr should name the violated condition: {stderr}"
    );
}

#[test]
fn missing_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--config",
        dir.path().join("nope.toml").to_str().unwrap(),
        "theory-dims",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cf_check_gaussian_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[exponents]
e_order = 1
e_entries = [1.25]
d_order = 1
d_entries = [0.5]

[field]
alpha = 2.0
psi = "diag"
spacing = 0.39269908169872414
radius = 25.132741228718345
resolution = 9
realizations = 4000
seed = 7

[cf_check]
points = [[1.0]]
thetas = [[0.5], [1.0]]
"#,
    );
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "cf-check",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("pass"), "{stdout}");
    let records = fs::read_to_string(dir.path().join("cf_check.jsonl")).unwrap();
    for line in records.lines() {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(rec["pass"], serde_json::Value::Bool(true), "{line}");
        assert_eq!(rec["seed"], 7);
    }
}

#[test]
fn boxdim_emits_records_and_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &SCALAR_CONFIG
            .replace("resolution = 17", "resolution = 2049")
            .replace("realizations = 3", "realizations = 2"),
    );
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "boxdim",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = fs::read_to_string(dir.path().join("boxdim.jsonl")).unwrap();
    // 2 realizations x 2 targets + 2 summaries
    assert_eq!(records.lines().count(), 6);
    let counts = fs::read_to_string(dir.path().join("boxdim_counts.csv")).unwrap();
    assert!(counts.starts_with("target,realization,log_inv_eps,log_count"));
    assert!(counts.lines().count() > 20);
}

#[test]
fn modulus_reports_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            "{SCALAR_CONFIG}\n[modulus]\nlevels = 6\nepsilon = 0.05\ndelta = 0.5\n"
        ),
    );
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "modulus",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = fs::read_to_string(dir.path().join("modulus.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 3);
    for line in records.lines() {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(rec["ratio"].as_f64().unwrap() > 0.0);
    }
}
