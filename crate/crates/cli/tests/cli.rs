use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adelic-baker"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn with_json(args: &[&str]) -> (Output, Value) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let mut all: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_owned();
    all.extend(["--json", &p]);
    let o = run(&all);
    let v = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    (o, v)
}

#[test]
fn delta_four_one() {
    let o = run(&["delta", "--l", "4", "--h", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "12");
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn missing_input_is_usage_error() {
    let o = run(&["verify", "--in", "/nonexistent/instance.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_instance_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"format":"adelic-baker/1","field":"x","alpha":["1"],"u":{"kind":"arch","branches":[0]},"beta":[["0","1"]],"v0":"inf"}"#).unwrap();
    let o = run(&["verify", "--in", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn wrong_format_tag_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v2.json");
    let text = std::fs::read_to_string(data("log2.json")).unwrap().replace("adelic-baker/1", "adelic-baker/2");
    std::fs::write(&path, text).unwrap();
    assert_eq!(run(&["verify", "--in", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_log_two() {
    let (o, v) = with_json(&["verify", "--in", data("log2.json").to_str().unwrap(), "--kind", "principal"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS"));
    assert_eq!(v["format"], "adelic-baker/1");
    assert_eq!(v["pass"], true);
    assert_eq!(v["hypothesis_status"], "certified");
    assert_eq!(v["bound"]["sign"], -1);
    let lam = v["lambda_abs"][0].as_str().unwrap();
    assert!(lam.starts_with("0.0031471805599"), "{lam}");
}

#[test]
fn verify_padic() {
    let (o, v) = with_json(&["verify", "--in", data("padic.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(v["lambda_abs"][0], "5^-1");
    assert_eq!(v["squared_domain"], true);
    assert_eq!(v["I"], serde_json::json!([1, 2]));
}

#[test]
fn verify_batch_keeps_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("batch.json");
    let a = std::fs::read_to_string(data("padic.json")).unwrap();
    let b = std::fs::read_to_string(data("log2.json")).unwrap();
    std::fs::write(&path, format!("[{a},{b}]")).unwrap();
    let (o, v) = with_json(&["verify", "--in", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["lambda_abs"][0], "5^-1");
}

#[test]
fn height_table() {
    let (o, v) = with_json(&["height", "--x", "3/2"]);
    assert_eq!(o.status.code(), Some(0));
    let h: f64 = v["value"].as_str().unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!((h - 3f64.ln()).abs() < 1e-15);
    let labels: Vec<&str> = v["places"].as_array().unwrap().iter().map(|p| p["p_or_inf"].as_str().unwrap()).collect();
    assert!(labels.contains(&"inf") && labels.contains(&"2"));
}

#[test]
fn bound_and_params() {
    let (o, v) = with_json(&["bound", "--in", data("bound.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(v["sign"], -1);
    assert_eq!(v["branch"], "main");
    assert!(v["log_magnitude_decimal"].as_str().unwrap().parse::<f64>().unwrap() > 2000.0);
    let (o, v) = with_json(&["params", "--in", data("bound.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for key in ["i", "ii", "iii", "iv"] {
        assert_eq!(v["properties"][key], true);
    }
}

#[test]
fn bundle_ops() {
    let f = data("bundle.json");
    let (o, v) = with_json(&["bundle", "degree", "--in", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let d: f64 = v["degree"].as_str().unwrap().split(' ').next().unwrap().parse().unwrap();
    // -log|det| at inf is -log(2/3); the 2-adic factor 4 contributes log 4
    assert!((d - (1.5f64.ln() + 4f64.ln())).abs() < 1e-15);
    let (o, v) = with_json(&["bundle", "dual", "--in", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(v["dim"], 2);
}

#[test]
fn siegel_commands() {
    let (o, v) = with_json(&["siegel", "search", "--kind", "classical", "--in", data("classical.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let x: Vec<i64> = v["witness"]["x"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().parse().unwrap()).collect();
    assert_eq!(3 * x[0] - 5 * x[1] + 7 * x[2] + 2 * x[3], 0);
    assert!(x.iter().map(|c| c.abs()).max().unwrap() <= 4);
    let o = run(&["siegel", "search", "--kind", "approx", "--in", data("approx.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["siegel", "search", "--kind", "absolute", "--in", data("absolute.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn selftest_single_criterion() {
    let o = run(&["selftest", "--criterion", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[PASS]  8"));
}
