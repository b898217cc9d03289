use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gasdemand::csvio;
use tempfile::TempDir;

fn gasdemand(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gasdemand"))
        .args(args)
        .env_remove("GASDEMAND_OUT_DIR")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Four years of synthetic data written through the CLI.
fn small_dataset(dir: &Path) -> PathBuf {
    let cfg = write(dir, "gen.toml", "start = \"2010-01-01\"\nend = \"2013-12-31\"\n");
    let out = dir.join("data.csv");
    let o = gasdemand(&["generate", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn generate_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "gen.toml", "start = \"2012-01-01\"\nend = \"2013-12-31\"\nseed = 9\n");
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    assert!(gasdemand(&["generate", "--config", s(&cfg), "--out", s(&a)]).status.success());
    assert!(gasdemand(&["generate", "--config", s(&cfg), "--out", s(&b)]).status.success());
    assert!(gasdemand(&["generate", "--config", s(&cfg), "--out", s(&c), "--seed", "10"]).status.success());
    let (a, b, c) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), std::fs::read(c).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("date,rgd,temp_forecast,temp_actual\n"));
    assert_eq!(text.lines().count(), 1 + 731);
}

#[test]
fn usage_errors_exit_with_two() {
    let o = gasdemand(&["backtest", "--data", "x.csv", "--models", "ridge,arima"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("arima"));
    let o = gasdemand(&["backtest"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--data"));
    assert_eq!(gasdemand(&["forecast"]).status.code(), Some(2));
    assert_eq!(gasdemand(&["errorprop", "--data", "x.csv", "--curve", "1:0:5"]).status.code(), Some(2));
}

#[test]
fn missing_or_bad_config_is_reported() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("d.csv");
    let o = gasdemand(&["generate", "--config", "/nonexistent/gen.toml", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/gen.toml"));
    let bad = write(dir.path(), "bad.toml", "alpha = -3.0\n");
    let o = gasdemand(&["generate", "--config", s(&bad), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn warm_only_data_has_no_error_propagation() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("date,rgd,temp_forecast,temp_actual\n");
    for d in 1..=30 {
        text.push_str(&format!("2015-07-{d:02},20,25.5,{}\n", 24 + d % 3));
    }
    let data = write(dir.path(), "warm.csv", &text);
    let o = gasdemand(&["errorprop", "--data", s(&data)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn errorprop_estimates_and_curve() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(dir.path());
    let out = dir.path().join("out");
    let o = gasdemand(&["errorprop", "--data", s(&data), "--sigma0", "13.31", "--curve", "0:0.5:11", "--out-dir", s(&out), "--no-timestamp"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let alpha: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("alpha"))
        .and_then(|v| v.trim_start_matches([' ', ':', '=']).split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((alpha - 10.5).abs() / 10.5 < 0.02, "{alpha}");
    assert!(stdout.contains("predicted_rmse"));
    let curve = std::fs::read_to_string(out.join("errorprop_curve.csv")).unwrap();
    assert_eq!(curve.lines().filter(|l| !l.starts_with('#')).count(), 1 + 11);
    assert!(std::fs::read_to_string(out.join("errorprop_curve.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn backtest_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(dir.path());
    let run = write(dir.path(), "run.toml", "[grids]\nridge_lambdas = [0.01, 1.0]\n");
    let outputs: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("out{i}"))).collect();
    for out in &outputs {
        let o = gasdemand(&[
            "backtest", "--data", s(&data), "--config", s(&run), "--models", "ridge", "--test-years", "2013",
            "--temperature", "forecast", "--out-dir", s(out), "--no-timestamp",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<_> = std::fs::read_dir(&outputs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(!names.is_empty());
    for n in &names {
        let a = std::fs::read(outputs[0].join(n)).unwrap();
        let b = std::fs::read(outputs[1].join(n)).unwrap();
        assert_eq!(a, b, "{n:?}");
    }
    let yearly = std::fs::read_to_string(outputs[0].join("yearly_forecast.csv")).unwrap();
    let rows: Vec<&str> = yearly.lines().filter(|l| !l.starts_with('#')).collect();
    // Header, the single test year, and the pooled row.
    assert_eq!(rows.len(), 3, "{yearly}");
    assert!(rows[1].starts_with("ridge,2013,365,"), "{yearly}");
    assert!(!yearly.starts_with('#'));
}

#[test]
fn dumped_features_and_saved_models_load_back() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(dir.path());
    let run = write(dir.path(), "run.toml", "[grids]\nridge_lambdas = [1.0]\n");
    let (feats, models) = (dir.path().join("features"), dir.path().join("models"));
    let o = gasdemand(&[
        "backtest", "--data", s(&data), "--config", s(&run), "--models", "ridge", "--test-years", "2013",
        "--temperature", "actual", "--out-dir", s(&dir.path().join("out")), "--dump-features", s(&feats),
        "--save-models", s(&models), "--no-timestamp",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let test = std::fs::File::open(feats.join("features_actual_2013_test.csv")).unwrap();
    let dump = csvio::read_features(test).unwrap();
    assert_eq!(dump.rows.len(), 365);
    let f = std::fs::File::open(models.join("ridge_actual_2013.json")).unwrap();
    let model = gasdemand::persist::load(f).unwrap();
    assert_eq!(model.kind(), gasdemand::core::ModelKind::Ridge);
}
