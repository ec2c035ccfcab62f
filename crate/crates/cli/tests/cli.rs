use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn davies(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_davies"))
        .args(args)
        .env_remove("DAVIES_DENSE_LIMIT")
        .output()
        .expect("binary runs")
}

fn davies_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_davies"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(format!("{name}-{}", std::process::id()))
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn example_document_round_trips() {
    let out = stdout(&davies(&["example", "oscillator", "--size", "6", "--gamma", "0.5", "--K", "2"]));
    let spec = davies_gap::load_system(&out).unwrap();
    assert_eq!(spec.dim(), 7);
    assert_eq!(spec.beta(), 2.0);
}

#[test]
fn example_to_file_then_bounds_from_file() {
    let path = scratch("ladder.json");
    let p = path.to_str().unwrap();
    let o = davies(&["example", "d_level", "--size", "6", "--K", "1", "--output", p]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let from_file = json(&davies(&["bounds", "--input", p]));
    let direct = json(&davies(&["bounds", "--example", "d_level", "--size", "6", "--K", "1"]));
    assert_eq!(from_file["lambda_lower"], direct["lambda_lower"]);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn oscillator_bounds_report_is_complete() {
    let r = json(&davies(&["bounds", "--example", "oscillator", "--size", "10", "--gamma", "1", "--K", "1"]));
    for key in ["tau0", "lambda_qm_gersh", "tau0_hat", "lambda_qm_tree", "lambda_exact", "lambda_exact_dense"] {
        assert!(r[key].as_f64().is_some_and(|v| v > 0.0), "{key} = {}", r[key]);
    }
    let lower = r["lambda_lower"].as_f64().unwrap();
    let exact = r["lambda_exact_dense"].as_f64().unwrap();
    assert!(lower <= exact);
    assert_eq!(r["dim"], 11);
}

#[test]
fn ladder_flags_gershgorin_failure() {
    let r = json(&davies(&["bounds", "--example", "d_level", "--size", "10", "--K", "1"]));
    assert_eq!(r["lambda_qm_gersh"].as_f64(), Some(0.0));
    assert!(r["lambda_qm_tree"].as_f64().is_some_and(|v| v > 0.0 && v.is_finite()));
    assert!(!r["failures"].as_array().unwrap().is_empty());
}

#[test]
fn no_oracle_leaves_exact_fields_empty() {
    let r = json(&davies(&["bounds", "--example", "oscillator", "--size", "6", "--no-oracle"]));
    assert!(r["lambda_exact"].is_null());
    assert!(r["lambda_exact_dense"].is_null());
    assert!(r["lambda_lower"].as_f64().is_some());
}

#[test]
fn bounds_csv_lists_scalars() {
    let text = stdout(&davies(&["bounds", "--example", "counterexample", "--size", "5", "--K", "0", "--format", "csv"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("quantity,value"));
    assert!(text.lines().any(|l| l == "dim,5"));
    assert!(text.lines().any(|l| l.starts_with("lambda_lower,0.")));
}

#[test]
fn exact_matches_block_minimum() {
    let r = json(&davies(&["exact", "--example", "particle_line", "--size", "6", "--K", "0.5"]));
    let dense = r["lambda_exact_dense"].as_f64().unwrap();
    let blocks = r["lambda_exact"].as_f64().unwrap();
    assert!((dense - blocks).abs() <= 1e-9 * dense);
    assert!(r["detailed_balance_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn blocks_dump_has_graphs_and_trees() {
    let r = json(&davies(&["blocks", "--example", "oscillator", "--size", "4"]));
    let blocks = r["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 5);
    assert_eq!(r["graphs"].as_array().unwrap().len(), 5);
    assert_eq!(r["trees"].as_array().unwrap().len(), 4);
    assert_eq!(blocks[1]["basis"].as_array().unwrap().len(), 4);
}

#[test]
fn malformed_document_exit_code() {
    let path = scratch("bad.json");
    std::fs::write(&path, "{\"energies\": [0, 1").unwrap();
    let o = davies(&["bounds", "--input", path.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed"));
    assert!(o.stdout.is_empty());
    std::fs::remove_file(path).unwrap();
}

#[test]
fn degenerate_document_exit_code() {
    let path = scratch("degenerate.json");
    let doc = r#"{"energies": [0, 1, 1], "couplings": [{"re": [[0,1,0],[1,0,1],[0,1,0]]}],
                  "beta": 1, "bath": {"kind": "glauber"}}"#;
    std::fs::write(&path, doc).unwrap();
    let o = davies(&["bounds", "--input", path.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn missing_file_and_usage_exit_codes() {
    assert_eq!(code(&davies(&["bounds", "--input", "/definitely/not/here.json"])), 1);
    assert_eq!(code(&davies(&["bounds", "--bogus"])), 2);
    assert_eq!(code(&davies(&["bounds"])), 2);
    assert_eq!(code(&davies(&["bounds", "--example", "pendulum"])), 2);
    assert_eq!(code(&davies(&["bounds", "--example", "oscillator", "--input", "x.json"])), 2);
    assert_eq!(code(&davies(&["sweep", "--example", "oscillator", "--size", "4:x", "--beta", "1"])), 2);
    assert_eq!(code(&davies(&["bounds", "--example", "oscillator", "--size", "0"])), 4);
    assert_eq!(code(&davies(&["bounds", "--example", "oscillator", "--epsilon", "2"])), 7);
}

#[test]
fn dense_limit_from_environment() {
    let args = ["exact", "--example", "oscillator", "--size", "4"];
    assert_eq!(code(&davies_env(&args, "DAVIES_DENSE_LIMIT", "3")), 6);
    assert_eq!(code(&davies_env(&args, "DAVIES_DENSE_LIMIT", "5")), 0);
    assert_eq!(code(&davies_env(&args, "DAVIES_DENSE_LIMIT", "lots")), 2);
    assert_eq!(code(&davies(&["exact", "--example", "counterexample", "--size", "65"])), 6);
}

#[test]
fn sweep_csv_shape_and_determinism() {
    let args = ["sweep", "--example", "counterexample", "--size", "4:10:3", "--beta", "0,0.1"];
    let a = stdout(&davies(&args));
    let b = stdout(&davies(&args));
    assert_eq!(a, b);
    let header = a.lines().next().unwrap();
    assert!(header.starts_with(
        "model,size,beta,gamma,lambda_cl_exact,lambda_qm_exact,tau0,tau0_hat,lambda_qm_gersh,lambda_qm_tree,lambda_lower,lambda_exact,tmix_bound"
    ));
    let rows = csv_rows(&a);
    assert_eq!(rows.len(), 6);
    let sizes: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(sizes, ["4", "7", "10", "4", "7", "10"]);
    for r in &rows {
        assert_eq!(r.len(), 14);
        assert_eq!(r[13], "ok");
    }
    // λ_cl = γ²/2 at β = 0
    assert_eq!(rows[0][4].parse::<f64>().unwrap(), 0.5);
}

#[test]
fn sweep_toggles_leave_columns_empty() {
    let o = stdout(&davies(&["sweep", "--example", "oscillator", "--size", "4", "--beta", "1", "--no-bounds"]));
    let row = &csv_rows(&o)[0];
    assert!(row[6].is_empty() && row[10].is_empty());
    assert!(!row[11].is_empty());
    let o = stdout(&davies(&["sweep", "--example", "oscillator", "--size", "4", "--beta", "1", "--no-oracle"]));
    let row = &csv_rows(&o)[0];
    assert!(row[4].is_empty() && row[11].is_empty());
    assert!(!row[10].is_empty());
}

#[test]
fn sweep_json_and_empty_list() {
    let r = json(&davies(&["sweep", "--example", "d_level", "--size", "4,5", "--beta", "1", "--format", "json"]));
    assert_eq!(r.as_array().unwrap().len(), 2);
    assert_eq!(code(&davies(&["sweep", "--example", "oscillator", "--size", "", "--beta", "1"])), 7);
}

#[test]
fn evolve_worst_stays_below_envelope() {
    let out = stdout(&davies(&["evolve", "--example", "d_level", "--size", "5", "--K", "1", "--times", "10,0,0.5,3,1"]));
    assert_eq!(out.lines().next(), Some("t,trace_distance,chi2,envelope"));
    let rows = csv_rows(&out);
    let times: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(times, [0.0, 0.5, 1.0, 3.0, 10.0]);
    for r in &rows {
        let dist: f64 = r[1].parse().unwrap();
        let env: f64 = r[3].parse().unwrap();
        assert!(dist <= env, "{dist} > {env}");
    }
    let d0: f64 = rows[0][1].parse().unwrap();
    let d_end: f64 = rows[4][1].parse().unwrap();
    assert!(d_end < d0);
}

#[test]
fn evolve_from_sigma_is_stationary() {
    let out = stdout(&davies(&["evolve", "--example", "oscillator", "--size", "4", "--rho0", "sigma", "--times", "0,2"]));
    for r in csv_rows(&out) {
        assert!(r[1].parse::<f64>().unwrap() < 1e-12);
        assert!(r[2].parse::<f64>().unwrap() < 1e-20);
    }
}

#[test]
fn evolve_rejects_negative_times() {
    assert_eq!(code(&davies(&["evolve", "--example", "oscillator", "--size", "3", "--times", "1,-1"])), 7);
    assert_eq!(code(&davies(&["evolve", "--example", "oscillator", "--size", "3", "--times", "a"])), 2);
}
