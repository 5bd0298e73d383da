use std::collections::HashMap;
use std::f64::consts::PI;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaf-zeros")).args(args).output().expect("binary runs")
}

fn keys(out: &Output) -> HashMap<String, String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter_map(|l| l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}

fn num(map: &HashMap<String, String>, key: &str) -> f64 {
    map.get(key).unwrap_or_else(|| panic!("missing {key}")).parse().unwrap()
}

#[test]
fn density_uniform() {
    let out = run(&["density", "--preset", "uniform", "--r", "0.5", "--phi", "0"]);
    assert!(out.status.success());
    let m = keys(&out);
    assert!((num(&m, "value") - 1.0 / (PI * 0.75 * 0.75)).abs() < 1e-12);
    assert!(m.contains_key("method"));
}

#[test]
fn density_ek_matches_spectral() {
    let ek = keys(&run(&["density", "--preset", "ma1:a=0.3", "--r", "0.99", "--phi", "0", "--method", "ek"]));
    let sp = keys(&run(&["density", "--preset", "ma1:a=0.3", "--r", "0.99", "--phi", "0", "--method", "spectral"]));
    let (a, b) = (num(&ek, "value"), num(&sp, "value"));
    assert!((a / b - 1.0).abs() < 1e-3, "{a} {b}");
}

#[test]
fn density_indicator_near_constant() {
    let m = keys(&run(&[
        "density",
        "--preset",
        "indicator:lo=-1.5707963,hi=1.5707963",
        "--r",
        "0.99",
        "--phi",
        "2.35619449",
    ]));
    assert!((num(&m, "value") / (1.0 / (6.0 * PI)) - 1.0).abs() < 0.03);
}

#[test]
fn density_accepts_complex_point() {
    let m = keys(&run(&["density", "--preset", "uniform", "--z", "-0.3,0.4"]));
    assert!((num(&m, "value") - 1.0 / (PI * 0.75 * 0.75)).abs() < 1e-12);
}

#[test]
fn asymptote_cases() {
    let m = keys(&run(&["asymptote", "--preset", "ma1:a=0.3", "--phi", &(PI / 3.0).to_string()]));
    assert_eq!(m["case"], "i");
    assert!((num(&m, "correction") + 0.09 / 1.69).abs() < 1e-12);

    let m = keys(&run(&["asymptote", "--preset", "ma1:a=0.5", "--phi", &PI.to_string()]));
    assert_eq!(m["case"], "ii");
    assert!((num(&m, "leading") - 0.5).abs() < 1e-12);

    let m = keys(&run(&["asymptote", "--preset", "indicator", "--phi", &(0.75 * PI).to_string()]));
    assert_eq!(m["case"], "iii");
    assert!((num(&m, "limit") - 1.0 / (6.0 * PI)).abs() < 1e-10);
}

#[test]
fn asymptote_json() {
    let out = run(&["asymptote", "--preset", "ma1:a=0.3", "--phi", "0", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["case"], "positive");
}

#[test]
fn experiment_analytic_total() {
    let out = run(&["experiment", "--preset", "uniform", "--n", "400", "--replicas", "200", "--rmax", "0.9", "--rbins", "3"]);
    assert!(out.status.success());
    let mut r = csv::Reader::from_reader(&out.stdout[..]);
    let idx = r.headers().unwrap().iter().position(|h| h == "analytic").unwrap();
    let total: f64 = r.records().map(|rec| rec.unwrap()[idx].parse::<f64>().unwrap()).sum();
    assert!((total - 0.81 / 0.19).abs() < 1e-8, "{total}");
}

#[test]
fn experiment_is_reproducible() {
    let args = [
        "experiment", "--preset", "ma1:a=0.3", "--n", "100", "--replicas", "10", "--rmax", "0.9", "--rbins", "3",
        "--phibins", "4", "--seed", "17",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 13);
}

#[test]
fn experiment_writes_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let out = run(&[
        "experiment", "--preset", "uniform", "--n", "60", "--replicas", "4", "--rmax", "0.8", "--format", "json", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["replicas"], 4);
}

#[test]
fn continuation_reports_regular_arc() {
    let m = keys(&run(&[
        "continuation",
        "--preset",
        "indicator:lo=-1.5707963267948966,hi=1.5707963267948966",
        "--r",
        "0.5",
    ]));
    let n: usize = m["arcs"].parse().unwrap();
    let regular: Vec<usize> = (0..n).filter(|i| m[&format!("arc[{i}].kind")] == "regular").collect();
    assert_eq!(regular.len(), 1);
    let i = regular[0];
    assert!((num(&m, &format!("arc[{i}].start")) - PI / 2.0).abs() < 1e-12);
    assert!((num(&m, &format!("arc[{i}].end")) - 1.5 * PI).abs() < 1e-12);
}

#[test]
fn presets_listing() {
    let m = keys(&run(&["presets"]));
    assert!(m.keys().filter(|k| k.ends_with(".syntax")).count() >= 4);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["density", "--preset", "nope", "--r", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["density", "--preset", "uniform", "--r", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["density", "--preset", "uniform", "--r", "0.9999999"]).status.code(), Some(3));
    assert_eq!(run(&["density", "--preset", "uniform", "--r", "0.5", "--bogus", "1"]).status.code(), Some(2));
    let out = run(&["asymptote", "--preset", "indicator", "--phi", &(PI / 2.0).to_string()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn thread_cap_is_honoured() {
    let out = Command::new(env!("CARGO_BIN_EXE_gaf-zeros"))
        .args(["density", "--preset", "uniform", "--r", "0.5"])
        .env("GAF_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_gaf-zeros"))
        .args(["density", "--preset", "uniform", "--r", "0.5"])
        .env("GAF_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
