use std::process::Command as Process;

use clap::Parser;
use vbcast_cli::{dispatch, read_csv, write_records, Cli, OutputFormat, RecordStatus, RunConfig, SweepRecord, HEADER};

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_vbcast"))
}

fn config(args: &[&str]) -> RunConfig {
    let argv = std::iter::once("vbcast").chain(args.iter().copied());
    RunConfig::from_cli(Cli::try_parse_from(argv).unwrap(), None).unwrap()
}

fn run_to_string(args: &[&str]) -> String {
    let mut out = Vec::new();
    dispatch(&config(args), &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn empty_table_is_header_only() {
    let mut out = Vec::new();
    write_records(&[], OutputFormat::Csv, &mut out).unwrap();
    assert_eq!(
        String::from_utf8(out).unwrap(),
        "a,b,gamma,d,nu,s,mu,t,status,gap,seconds\n"
    );
    let mut out = Vec::new();
    write_records(&[], OutputFormat::Json, &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap().trim(), "[]");
}

#[test]
fn exact_record_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exact.csv");
    run_to_string(&["exact", "--dim", "2", "--out", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), HEADER.join(","));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..6], ["", "", "", "2", "1.66666667", "2.77777778"]);
    assert_eq!(&row[6..9], ["", "", "optimal"]);
    assert!(lines.next().is_none());
}

#[test]
fn csv_round_trip_is_byte_identical() {
    let text = run_to_string(&["tradeoff", "--gammas", "0.5,1,1.8", "--dims", "2"]);
    let records = read_csv(text.as_bytes()).unwrap();
    assert_eq!(records.len(), 3);
    assert_eq!(records[0].status, RecordStatus::Infeasible);
    assert!(records[0].mu.is_none());
    let mut again = Vec::new();
    write_records(&records, OutputFormat::Csv, &mut again).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), text);
}

#[test]
fn json_rows_use_the_csv_keys() {
    let text = run_to_string(&["tradeoff", "--gammas", "1", "--dims", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let row = v.as_array().unwrap()[0].as_object().unwrap();
    let keys: Vec<&str> = row.keys().map(String::as_str).collect();
    assert_eq!(keys, HEADER);
    assert!(row["a"].is_null() && row["nu"].is_null());
    assert_eq!(row["status"], "optimal");
    assert!((row["mu"].as_f64().unwrap() - 0.25).abs() < 1e-4);
}

#[test]
fn sweep_is_symmetric_and_sorted() {
    let text = run_to_string(&["sweep-ab", "--grid", "5", "--jobs", "2"]);
    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 25);
    assert!(rows.windows(2).all(|w| w[0].input_order(&w[1]).is_lt()));
    let find = |a: f64, b: f64| rows.iter().find(|r| r.a == Some(a) && r.b == Some(b)).unwrap();
    for r in &rows {
        let mirror = find(r.b.unwrap(), r.a.unwrap());
        assert!((r.s.unwrap() - mirror.s.unwrap()).abs() <= 1e-5);
        assert!(r.is_finite_when_optimal());
    }
    assert!((find(0.0, 0.0).nu.unwrap() - 5.0 / 3.0).abs() < 1e-6);
    assert!((find(1.0, 1.0).nu.unwrap() - 1.0).abs() < 1e-6);
}

fn without_seconds(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect()
}

#[test]
fn output_is_deterministic_apart_from_timing() {
    let x = run_to_string(&["sweep-ab", "--grid", "4", "--jobs", "3"]);
    let y = run_to_string(&["sweep-ab", "--grid", "4", "--jobs", "1"]);
    assert_eq!(without_seconds(&x), without_seconds(&y));
    assert_eq!(x.lines().count(), 17);
}

#[test]
fn exact_prints_overhead() {
    let out = bin().args(["exact", "--dim", "2"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("nu=1.666667 s=2.777778"));
}

#[test]
fn min_error_anchors() {
    let out = bin()
        .args(["min-error", "--gamma", "1", "--dim", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("mu=0.250000"));
    let out = bin()
        .args(["min-error", "--gamma", "1.8", "--dim", "2"])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let mu: f64 = text
        .split("mu=")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((mu - 0.12).abs() < 0.02);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code().unwrap();
    assert_eq!(code(&["exact", "--dim", "1"]), 2);
    assert_eq!(code(&["exact", "--dim", "5"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["sweep-ab", "--grid", "1"]), 2);
    assert_eq!(code(&["exact", "--tol-gap", "0"]), 2);
    assert_eq!(
        code(&[
            "tradeoff",
            "--dims",
            "2",
            "--gammas",
            "1",
            "--out",
            "/proc/forbidden/x.csv"
        ]),
        4
    );
    // two iterations cannot converge and the overhead problem reports it
    assert_eq!(code(&["exact", "--max-iter", "2"]), 3);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["tradeoff", "--gammas", "1", "--dims", "2", "--format", "json"])
        .env(vbcast_cli::OUT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("tradeoff.json")).unwrap();
    assert!(text.contains("\"status\": \"optimal\""));
}

#[test]
fn simulate_reports_the_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.json");
    let out = bin()
        .args([
            "simulate",
            "--shots",
            "20000",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["shots"], 20000);
    assert_eq!(v["seed"], 7);
    assert!((v["scale"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
    assert!((v["mean"].as_f64().unwrap() - v["analytic_mean"].as_f64().unwrap()).abs() < 0.05);
}

#[test]
fn records_are_constructible_directly() {
    let r = SweepRecord {
        nu: Some(5.0 / 3.0),
        ..SweepRecord::empty(2, RecordStatus::Optimal)
    };
    let mut out = Vec::new();
    write_records(&[r], OutputFormat::Csv, &mut out).unwrap();
    assert!(String::from_utf8(out)
        .unwrap()
        .ends_with(",,,2,1.66666667,,,,optimal,,\n"));
}
