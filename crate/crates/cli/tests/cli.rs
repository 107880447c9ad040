use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nlslab::config::ExperimentConfig;

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn nlslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlslab")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// Numeric column of a CSV file by header name.
fn column(path: &Path, name: &str) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn simulate_linear_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = nlslab(&["simulate", "--config", example("linear_gaussian.toml").to_str().unwrap(), "--out", out, "--strict"]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let mass = column(&dir.path().join("index.csv"), "mass");
    assert_eq!(mass.len(), 11);
    let drift = mass.iter().map(|m| (m - mass[0]).abs() / mass[0]).fold(0.0, f64::max);
    assert!(drift <= 1e-9, "{drift}");
    assert!(dir.path().join("run.toml").exists());
    assert!(dir.path().join("snap_000010.nlsf").exists());
}

#[test]
fn concat_defocusing_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = nlslab(&[
        "concat",
        "--config",
        example("defocusing_sweep.toml").to_str().unwrap(),
        "--out",
        out,
        "--jobs",
        "2",
        "--strict",
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let eps = column(&dir.path().join("concat_sweep_5.csv"), "eps");
    assert_eq!(eps.len(), 4);
    assert!(eps.windows(2).all(|w| w[1] < w[0]), "{eps:?}");
}

#[test]
fn strict_violation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(example("linear_gaussian.toml")).unwrap();
    let cfg = dir.path().join("tight.toml");
    // the S1 proxy of this run is about 2, far above the bound
    fs::write(&cfg, format!("{text}\n[thresholds]\nbound_m = 0.1\n")).unwrap();
    let out = dir.path().join("out");
    let args = ["gdproxy", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    assert_eq!(code(&nlslab(&args)), 0);
    let mut strict = args.to_vec();
    strict.push("--strict");
    let res = nlslab(&strict);
    assert_eq!(code(&res), 1);
    assert!(String::from_utf8_lossy(&res.stdout).contains("violation:"));
    assert!(out.join("gdproxy_horizon_1.csv").exists());
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[grid]\ndim = \"one\"\n").unwrap();
    let out = dir.path().join("out");
    for cmd in ["simulate", "concat"] {
        assert_eq!(code(&nlslab(&[cmd, "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()])), 2);
    }
    assert_eq!(code(&nlslab(&["validate", "--config", bad.to_str().unwrap()])), 2);
    let invalid = fs::read_to_string(example("linear_gaussian.toml")).unwrap().replace("dt = 0.01", "dt = 0.0");
    fs::write(&bad, invalid).unwrap();
    let res = nlslab(&["validate", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stdout).contains("dt"));
    assert_eq!(code(&nlslab(&["simulate", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()])), 2);
}

#[test]
fn examples_validate_and_round_trip() {
    let mut seen = 0;
    for entry in fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        seen += 1;
        let res = nlslab(&["validate", "--config", path.to_str().unwrap()]);
        assert_eq!(code(&res), 0, "{}", path.display());
        assert!(res.stdout.is_empty(), "{}: {}", path.display(), String::from_utf8_lossy(&res.stdout));
        let cfg = ExperimentConfig::load(&path).unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap(), cfg);
    }
    assert!(seen >= 10);
}
