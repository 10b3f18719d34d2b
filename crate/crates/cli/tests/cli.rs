use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn qthermo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qthermo")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    (header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

fn footer(text: &str, key: &str) -> f64 {
    let prefix = format!("# {key}=");
    text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_else(|| panic!("no footer {key}")).parse().unwrap()
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn temp_equilibrium_and_squeezed() {
    let out = qthermo(&["temp", "--t2", "1", "--r", "0,1", "--omega", "1"]);
    assert!(out.status.success());
    let (header, rows) = rows(&stdout(&out));
    assert_eq!(header.join(","), "omega,T2,r,n_bar,N_eff,kms_ratio,T_local");
    let t = col(&header, "T_local");
    assert_eq!(rows[0][t], "1");
    let t_sq: f64 = rows[1][t].parse().unwrap();
    assert!((t_sq - 4.0501).abs() < 1e-4);
}

#[test]
fn temp_rejects_zero_frequency() {
    let out = qthermo(&["temp", "--t2", "1", "--r", "0,1", "--omega", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--omega"));
}

#[test]
fn temp_reports_infinite_temperature() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("flat.csv");
    fs::write(&spec, "omega,g_plus,g_minus\n0.5,1,1\n2,1,1\n").unwrap();
    let out = qthermo(&["temp", "--spectrum", spec.to_str().unwrap(), "--omega", "1"]);
    assert!(out.status.success());
    let (header, rows) = rows(&stdout(&out));
    assert_eq!(rows[0][col(&header, "T_local")], "inf");
}

#[test]
fn tabulated_parse_error_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.csv");
    fs::write(&spec, "omega,g_plus,g_minus\n0.5,1,0.5\n1.0,x,0.2\n").unwrap();
    let out = qthermo(&["temp", "--spectrum", spec.to_str().unwrap(), "--omega", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn two_level_thermometer_thermalizes() {
    let out = qthermo(&["thermometer", "--kind", "two-level", "--omega", "1", "--bath", "thermal", "--t2", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("t,p_g,p_e,entropy\n"));
    assert!(footer(&text, "final_trace_dist_gibbs") < 1e-6);
    assert!(footer(&text, "steady_trace_dist_gibbs") < 1e-10);
}

#[test]
fn oscillator_thermometer_reaches_squeezed_occupation() {
    let out = qthermo(&[
        "thermometer", "--kind", "oscillator", "--omega", "1", "--bath", "squeezed", "--t2", "1", "--r", "1",
        "--t-final", "90",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let (header, rows) = rows(&text);
    let n: f64 = rows.last().unwrap()[col(&header, "mean_n")].parse().unwrap();
    assert!((n - 3.5706).abs() < 1e-3);
    assert!(footer(&text, "levels") > 30.0);
    assert!(footer(&text, "steady_tail") < 1e-6);
}

#[test]
fn thermometer_stability_guard_exit_code() {
    let out = qthermo(&["thermometer", "--kind", "two-level", "--omega", "1", "--bath", "thermal", "--t2", "1", "--dt", "10"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stability"));
}

#[test]
fn engine_beyond_carnot_row() {
    let out = qthermo(&["engine", "--omega-c", "1", "--omega-h", "4", "--t1", "1", "--t2", "2", "--r", "1"]);
    assert!(out.status.success());
    let (header, rows) = rows(&stdout(&out));
    assert_eq!(header.len(), 17);
    let get = |name: &str| rows[0][col(&header, name)].parse::<f64>().unwrap();
    assert_eq!(get("eta"), 0.75);
    assert_eq!(get("eta_carnot_naive"), 0.5);
    assert!((get("eta_generalized") - 0.89737).abs() < 1e-5);
}

#[test]
fn engine_r0_never_beats_carnot() {
    let out = qthermo(&["engine", "--r", "0", "--tau-h", "10", "--tau-c", "10", "--max-power"]);
    assert!(out.status.success());
    let (header, rows) = rows(&stdout(&out));
    for row in rows {
        let eta: f64 = row[col(&header, "eta")].parse().unwrap();
        let naive: f64 = row[col(&header, "eta_carnot_naive")].parse().unwrap();
        assert!(eta <= naive + 1e-12);
    }
}

#[test]
fn engine_random_rows_pass_bound_check() {
    let out = qthermo(&["engine", "--random", "1000", "--seed", "11", "--verify-bounds"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(rows(&text).1.len(), 1000);
    assert_eq!(footer(&text, "bounds_checked"), 1000.0);
}

#[test]
fn engine_output_is_deterministic() {
    let a = qthermo(&["engine", "--random", "50", "--seed", "7"]);
    let b = qthermo(&["engine", "--random", "50", "--seed", "7"]);
    let c = qthermo(&["engine", "--random", "50", "--seed", "8"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn engine_sweep_keeps_row_order() {
    let out = qthermo(&["engine", "--r", "2,0,1", "--tau-h", "10", "--tau-c", "10", "--max-power"]);
    assert!(out.status.success());
    let (header, rows) = rows(&stdout(&out));
    let rs: Vec<&str> = rows.iter().map(|r| r[col(&header, "r")].as_str()).collect();
    assert_eq!(rs, ["2", "0", "1"]);
    assert_eq!(rows[0][col(&header, "boundary_hit")], "true");
}

#[test]
fn entropy_two_bath_from_ground() {
    let out = qthermo(&[
        "entropy", "--kind", "two-level", "--omega", "1", "--t1", "0.5", "--hot", "squeezed", "--t2", "1", "--r", "1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let (header, rows) = rows(&text);
    assert_eq!(header.join(","), "t,J_cold,J_hot,beta_cold,beta_hot,dS_dt,sigma");
    let s = col(&header, "sigma");
    assert!(rows.iter().all(|r| r[s].parse::<f64>().unwrap() > 0.0));
    assert!(footer(&text, "steady_J_sum").abs() < 1e-9);
}

#[test]
fn entropy_single_bath_gibbs_start_is_balanced() {
    let out = qthermo(&["entropy", "--kind", "oscillator", "--omega", "1", "--t1", "0.5", "--single-bath", "--initial", "gibbs"]);
    assert!(out.status.success());
    let (header, rows) = rows(&stdout(&out));
    let s = col(&header, "sigma");
    assert!(rows.iter().all(|r| r[s].parse::<f64>().unwrap().abs() <= 1e-9));
}

#[test]
fn json_output_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out_path = dir.path().join("out.json");
    fs::write(&cfg, r#"{"t2": 1, "r": [0, 1], "omega": [2], "format": "json"}"#).unwrap();
    let out = qthermo(&["temp", "--config", cfg.to_str().unwrap(), "--omega", "1", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["meta"]["units"], "hbar = k_B = 1");
    assert_eq!(v["meta"]["params"]["omega"], serde_json::json!([1.0]));
    assert_eq!(v["meta"]["params"]["t2"], 1.0);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["rows"][0][6], 1.0);
}

#[test]
fn config_typo_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.json");
    fs::write(&cfg, r#"{"t2": 1, "omegaa": [1]}"#).unwrap();
    let out = qthermo(&["temp", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("omegaa"));
}
