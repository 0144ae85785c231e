use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dqc1(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqc1")).args(args).env_remove("DQC1_SEED").output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = dqc1(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ip2_one_clean_all_inputs() {
    let out = dqc1(&["run", "--protocol", "ip2-one-clean", "--n", "2", "--all-inputs", "--csv"]);
    assert!(out.status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 16);
    for r in rows {
        assert!((r[6].parse::<f64>().unwrap() - 0.125).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn middle_single_input() {
    let r = ok_json(&["run", "--protocol", "middle", "--n", "4", "--x", "1100", "--y", "1010"]);
    assert!((r["records"][0]["acceptance"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(r["tool"], "dqc1");
    assert_eq!(r["seed"], 0);
    assert_eq!(r["config"]["source"]["protocol"], "middle");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(dqc1(&["run", "--descriptor", path_str(&bad)]).status.code(), Some(2));
    assert_eq!(dqc1(&["run", "--protocol", "ip2-one-clean", "--n", "11", "--all-inputs"]).status.code(), Some(3));
    assert_eq!(dqc1(&["transform", "--protocol", "ip2-clocked", "--pass", "nope"]).status.code(), Some(2));
    assert_eq!(dqc1(&["transform", "--protocol", "ip2-clocked", "--pass", "unclock"]).status.code(), Some(2));
    assert_eq!(dqc1(&["classical", "caps", "--n", "2", "--k", "1"]).status.code(), Some(2));
    assert_eq!(dqc1(&["run", "--protocol", "nope"]).status.code(), Some(2));
}

#[test]
fn k1_certificate() {
    let r = ok_json(&["transform", "--protocol", "ip2-clocked", "--n", "2", "--pass", "k1"]);
    assert_eq!(r["cert"]["predicted_bias_exact"], serde_json::json!([1, 8]));
    assert_eq!(r["valid"], true);
}

#[test]
fn sq_measure_keeps_accept_all() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sq.json");
    ok_json(&["transform", "--protocol", "accept-all", "--pass", "sq-measure", "--emit", path_str(&path)]);
    let r = ok_json(&["run", "--descriptor", path_str(&path)]);
    assert_eq!(r["records"][0]["acceptance"], 1.0);
}

#[test]
fn unclocked_chain_matches_formula() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chain.json");
    ok_json(&["transform", "--protocol", "ip2-clocked", "--n", "2", "--pass", "k1,sq-measure", "--pass", "trace-form,unclock", "--emit", path_str(&path)]);
    let out = dqc1(&["run", "--descriptor", path_str(&path), "--all-inputs", "--n", "2", "--backend", "trace", "--csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for r in csv_rows(&out) {
        let (x, y) = r[0].split_once('|').unwrap();
        let ip = x.chars().zip(y.chars()).filter(|&(a, b)| a == '1' && b == '1').count() % 2;
        let want = 0.5 + 1.0 / 16.0 + if ip == 1 { 1.0 } else { -1.0 } / 64.0;
        assert!((r[1].parse::<f64>().unwrap() - want).abs() < 1e-9, "{r:?}");
    }
}

#[test]
fn pp_oneway_chain() {
    let r = ok_json(&["transform", "--pass", "pp-oneway", "--pp", "xor-toy", "--eps", "0.25"]);
    assert_eq!(r["cert"]["q1_cost_bound"], 128.0);
    assert_eq!(dqc1(&["transform", "--pass", "pp-oneway"]).status.code(), Some(2));
}

#[test]
fn reports_are_reproducible_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let args = |p: &Path| vec!["classical".to_string(), "knr".into(), "--n".into(), "8".into(), "--eps".into(), "0.2".into(), "--trials".into(), "20".into(), "--output".into(), path_str(p).to_string()];
    let run = |p: &Path, seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_dqc1"));
        c.args(args(p)).env_remove("DQC1_SEED");
        if let Some(s) = seed {
            c.env("DQC1_SEED", s);
        }
        assert!(c.output().unwrap().status.success());
        std::fs::read(p).unwrap()
    };
    let first = run(&a, Some("9"));
    assert_eq!(first, run(&a, Some("9")));
    assert_ne!(first, run(&a, Some("10")));
    let v: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["seed"], 9);
    assert_eq!(v["transcript"]["total"], 200);
    let out = Command::new(env!("CARGO_BIN_EXE_dqc1"))
        .args(["gen", "razborov", "--n", "14", "--seed", "4"])
        .env("DQC1_SEED", "9")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 4);
}

#[test]
fn classical_commands() {
    let r = ok_json(&["classical", "caps", "--n", "4", "--k", "1", "--samples", "100000"]);
    assert!((r["estimate"].as_f64().unwrap() - 0.391).abs() < 0.01);
    assert!((r["bound"].as_f64().unwrap() - 0.0230).abs() < 1e-4);
    assert_eq!(r["pass"], true);

    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("eq2.csv");
    std::fs::write(&m, "1,-1\n-1,1\n").unwrap();
    let r = ok_json(&["classical", "disc", "--matrix", path_str(&m)]);
    assert_eq!(r["value"], 0.25);
    assert_eq!(r["rectangle"]["rows"], serde_json::json!([0]));

    let r = ok_json(&["classical", "abc", "--n", "8", "--k", "2", "--trials", "3", "--c", "0.5"]);
    assert_eq!(r["codebook_size"], 2471);
    // 12 index bits + ⌈0.5 / (10⁻⁴·¼)⌉ sketch bits
    assert_eq!(r["transcript"]["total"], 12 + 20_000);
}

#[test]
fn abc_instance_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (label, want) in [("1", 1.0), ("-1", 0.0)] {
        let path = dir.path().join(format!("abc{label}.json"));
        let out = dqc1(&["gen", "abc-instance", "--n", "4", "--label", label, "--seed", "3", "--output", path_str(&path)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let r = ok_json(&["run", "--protocol", "abc", "--n", "4", "--instance", path_str(&path)]);
        assert!((r["records"][0]["acceptance"].as_f64().unwrap() - want).abs() < 1e-9);
    }
}

#[test]
fn middle_pad_and_verify() {
    let r = ok_json(&["gen", "middle-pad", "--n", "14", "--x", "11000000", "--y", "00110000"]);
    assert_eq!(r["t"], -1);
    let r = ok_json(&["gen", "middle-pad", "--n", "14", "--x", "11000000", "--y", "01100000"]);
    assert_eq!(r["t"], 0);
    let out = dqc1(&["verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}
