use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubicmf")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = run(&all);
    let v = serde_json::from_slice(&out.stdout).expect("json report");
    (v, out.status.code().unwrap())
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_cubicmf"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

#[test]
fn enumerate_rank2_3gen_counts_72() {
    let (v, code) = json(&["enumerate", "--catalog", "rank2_3gen"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["records"][0]["detail"]["count"], 72);
}

#[test]
fn verify_all_passes() {
    let (v, code) = json(&["verify", "--all"]);
    assert_eq!(code, 0);
    assert_eq!(v["summary"]["failed"], 0);
    let total = v["summary"]["total"].as_u64().unwrap();
    assert!(total >= 432 + 162 + 108 + 126 + 40, "{}", total);
}

#[test]
fn verify_single_family() {
    let (v, code) = json(&["verify", "--family", "phi_t_sigma:t=1,sigma=234,a=-1,b=-w,u=w"]);
    assert_eq!(code, 0);
    assert_eq!(v["records"][0]["outcome"], "pass");
    assert_eq!(v["records"][0]["detail"]["size"], 4);
}

#[test]
fn unknown_family_is_usage_error() {
    let out = run(&["verify", "--family", "phi_q:t=9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown family"));
    assert_eq!(run(&["verify", "--family", "phi_t_sigma:t=7,sigma=234,a=-1,b=-1,u=w"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn sampling_is_deterministic() {
    let args = ["moduli", "sample", "--lambda", "0,-1", "--seed", "7", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let outcome = v["records"][0]["outcome"].as_str().unwrap();
    assert!(outcome == "pass" || outcome == "inconclusive");
    if outcome == "pass" {
        assert_eq!(v["records"][0]["detail"]["point"]["certified"], true);
    }
}

#[test]
fn solve_reports_linear_layer() {
    let (v, code) = json(&["moduli", "solve", "--lambda", "0,-1", "--free", "1,-1,-1"]);
    assert_eq!(code, 0);
    let recs = v["records"].as_array().unwrap();
    let lin = recs.iter().find(|r| r["check"] == "linear_system").unwrap();
    assert_eq!(lin["detail"]["nullity"], 3);
    let res = recs.iter().find(|r| r["check"] == "residual_equations").unwrap();
    assert_eq!(res["detail"]["certified"], true);
}

#[test]
fn uk_action_scales_gamma() {
    let (v, code) = json(&[
        "moduli", "act", "--lambda", "0,-1", "--gamma", "1,2,3,0,0,0,1,1,1,1,1,1,1,1,1", "--action", "uk", "--k", "2",
    ]);
    assert_eq!(code, 0);
    let g: Vec<&str> = v["records"][0]["detail"]["gamma"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert_eq!(&g[..3], &["4", "8", "12"]);
}

#[test]
fn h_needs_self_dual_point() {
    let out = run(&[
        "moduli", "act", "--lambda", "0,-1", "--gamma", "0,0,0,0,0,0,0,0,0,0,0,0,0,0,0", "--action", "h", "--h", "1,0,0,1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn equiv_conjugate_pair_and_reduced_test() {
    let (v, _) = json(&[
        "equiv",
        "--left",
        "phi_t_sigma:t=1,sigma=234,a=-1,b=-1,u=w",
        "--right",
        "psi_t_sigma:t=3,sigma=234,a=-1,b=-1,u=w",
    ]);
    assert_eq!(v["records"][0]["outcome"], "not_equivalent");
    let (v, _) = json(&[
        "equiv",
        "--left",
        "phi_t_sigma:t=1,sigma=234,a=-1,b=-1,u=w",
        "--right",
        "psi_t_sigma:t=3,sigma=234,a=-1,b=-1,u=-1-w",
    ]);
    assert_eq!(v["records"][0]["outcome"], "equivalent_with_witness");
    assert_eq!(v["records"][0]["check"], "full_scalar_test");
}

#[test]
fn pfaffian_and_det_from_stdin() {
    let m = "0,x1,x2,x3; -x1,0,x4,x1; -x2,-x4,0,x2; -x3,-x1,-x2,0";
    let out = run_stdin(&["pfaffian", "--format", "json"], m);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["records"][0]["detail"]["value"], "x3*x4");
    let out = run_stdin(&["det", "--format", "json"], m);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["records"][0]["detail"]["value"], "x3^2*x4^2");
    let out = run_stdin(&["pfaffian"], "1, x1; x1, 0");
    assert_eq!(out.status.code(), Some(2));
}
