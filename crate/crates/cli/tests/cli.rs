use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_norming-lab");
const P2: &str = r#"{"kind":"polynomial","vars":1,"degree":2}"#;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], threads: &str) -> Output {
    Command::new(BIN)
        .args(args)
        .env("NORMING_LAB_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn norming_exact_value() {
    let out = run(&["norming", "--space", P2, "--points", "[-1,0,1]", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["tool"], "norming-lab");
    assert!(v["version"].is_string());
    assert_eq!(v["config"]["grid_spacing"], 0.001);
    assert!((v["report"]["value"].as_f64().unwrap() - 1.25).abs() < 1e-6);
    assert_eq!(v["report"]["certified"], true);
}

#[test]
fn not_norming_exit_code() {
    let out = run(&["norming", "--space", P2, "--points", "[-1,1]", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["report"]["norming"], false);
}

#[test]
fn malformed_space_names_key() {
    let out = run(&["norming", "--space", r#"{"kind":"polynomial","vars":1,"degre":2}"#, "--points", "[0]"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("degree"), "{err}");
}

#[test]
fn csv_points_with_bad_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.csv");
    fs::write(&path, "x\n-1\nzero\n1\n").unwrap();
    let out = run(&["norming", "--space", P2, "--points", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("zero"), "{err}");
}

#[test]
fn span_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.csv");
    fs::write(&path, "-1\n0\n1\n").unwrap();
    let out = run(&["span", "--points", path.to_str().unwrap(), "--degree", "2", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["report"];
    assert_eq!(r["span"], 1.0);
    assert_eq!(r["attained"], false);
}

#[test]
fn chebyshev_bound_prints_17() {
    let out = run(&["bound", "--name", "chebyshev", "--d", "2", "--x", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# norming-lab"));
    assert!(text.contains("# config {"));
    assert_eq!(text.lines().last(), Some("17"));
}

#[test]
fn bound_missing_parameter() {
    let out = run(&["bound", "--name", "remez", "--d", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--mu"));
}

#[test]
fn audit_finding_and_reproduction() {
    let out = run(&["audit", "--space", P2, "--points", "[-1,0,1]", "--bounds", r#"[{"name":"cor22"}]"#, "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out)["report"].clone();
    assert_eq!(r["violations"], 1);
    let f = &r["findings"][0];
    assert_eq!(f["status"], "violation");
    assert_eq!(f["bound"]["value"], 1.0);
    let repro = f["repro"].as_str().unwrap().replacen("norming-lab", BIN, 1);
    let again = Command::new("sh").arg("-c").arg(&repro).output().unwrap();
    assert_eq!(again.status.code(), Some(0));
    let r2 = json(&again)["report"].clone();
    assert_eq!(r2["findings"], r["findings"]);
}

#[test]
fn audit_remez_on_dense_sample() {
    let pts: Vec<String> = (0..=2000).map(|i| format!("{}", -1.0 + i as f64 / 1000.0)).collect();
    let points = format!("[{}]", pts.join(","));
    let out = run(&[
        "audit",
        "--space",
        P2,
        "--points",
        &points,
        "--bounds",
        r#"[{"name":"remez","mu":2.0},{"name":"bg","lambda":1.0}]"#,
        "--grid",
        "0.01",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["report"];
    assert_eq!(r["violations"], 0);
    assert_eq!(r["findings"].as_array().unwrap().len(), 2);
}

#[test]
fn audit_empty_list() {
    let out = run(&["audit", "--space", P2, "--points", "[-1,0,1]", "--bounds", "[]", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["report"]["findings"].as_array().unwrap().len(), 0);
}

#[test]
fn estimate_c_is_deterministic_across_threads() {
    let args = ["estimate-c", "--trials", "1000", "--seed", "7", "--json"];
    let a = run_env(&args, "1");
    let b = run_env(&args, "3");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = json(&a)["report"]["c"].as_f64().unwrap();
    assert!(c.is_finite() && c > 0.0);
}

#[test]
fn norming_lp_is_deterministic_across_threads() {
    let args = ["norming", "--space", r#"{"kind":"polynomial","vars":2,"degree":2}"#, "--points", "[[-1,-1],[1,-1],[-1,1],[1,1],[0,0],[0.5,-0.3],[0.2,0.9]]", "--grid", "0.02", "--json"];
    let a = run_env(&args, "1");
    let b = run_env(&args, "4");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bad_thread_count() {
    let out = run_env(&["bound", "--name", "e", "--x", "2"], "zero");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("span.csv");
    let out = run(&["span", "--points", "[-1,0,1]", "--degree", "1", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, vec!["eps_from,eps_to,cover_count", "0,1,3", "1,inf,1"]);
}

#[test]
fn lipschitz_equality_case() {
    let out = run(&[
        "lipschitz",
        "--space",
        r#"{"kind":"polynomial","vars":1,"degree":1}"#,
        "--points",
        "[-1,1]",
        "--points2",
        "[-0.9,0.9]",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["report"];
    assert!((r["lipschitz"]["lhs"].as_f64().unwrap() - 0.1).abs() < 1e-9);
    assert_eq!(r["lipschitz"]["status"], "satisfied");
    assert!((r["ball_bound"]["bound"].as_f64().unwrap() - 10.0 / 9.0).abs() < 1e-9);
}

#[test]
fn tn_and_fewnomial_mark_provenance() {
    let out = run(&[
        "tn",
        "--poly",
        r#"{"terms":[{"re_c":1,"re_rate":[1]},{"re_c":-1,"re_rate":[0]}]}"#,
        "--z",
        "0.5,1",
        "--c",
        "1",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["report"];
    assert_eq!(r["meas_z_provenance"], "computed");
    assert_eq!(r["satisfied"], true);

    let out = run(&["fewnomial", "--exponents", "[[2,1]]", "--body", r#"{"a":[1,2],"b":[2,4]}"#, "--meas-z", "1", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["report"];
    assert_eq!(r["meas_z_provenance"], "user-asserted");
    assert!((r["bounds"][0]["value"].as_f64().unwrap() - 8.0).abs() < 1e-12);

    let out = run(&["tn", "--poly", r#"{"terms":[{"re_c":1,"re_rate":[1]},{"re_c":-1,"re_rate":[0]}]}"#, "--z", "0.5,1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fekete_with_sandwich() {
    let out = run(&["fekete", "--space", P2, "--points", "[-1,-0.5,0,0.5,1]", "--mode", "exhaustive", "--sandwich", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["report"];
    assert_eq!(r["subset"]["indices"], serde_json::json!([0, 2, 4]));
    assert_eq!(r["sandwich"]["holds"], true);
}
