use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    run_env(args, None)
}

fn run_env(args: &[&str], cache: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cluster-cone"));
    c.args(args).env_remove("CLUSTER_CONE_CACHE");
    if let Some(dir) = cache {
        c.env("CLUSTER_CONE_CACHE", dir);
    }
    c.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn uvars_for_a1_with_one_frozen_variable() {
    let out = run(&["uvars", "--type", "A1", "--frozen", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let ratios: Vec<&str> = v["uvars"].as_array().unwrap().iter().map(|u| u["ratio"].as_str().unwrap()).collect();
    assert_eq!(ratios, ["1/(x[-1]*x[1])", "f1/(x[-1]*x[1])"]);
    assert_eq!(v["legend"].as_array().unwrap().len(), 3);
}

#[test]
fn enumerate_a3() {
    let v = json(&run(&["enumerate", "--type", "A3", "--format", "json"]));
    assert_eq!(v["seeds"].as_array().unwrap().len(), 6);
    assert_eq!(v["variables"].as_array().unwrap().len(), 9);
}

#[test]
fn gr36_pluecker_cone_has_18_rays() {
    let out = run(&["cone", "--gr", "3", "6", "--subset", "pluecker", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["rays"].as_array().unwrap().len(), 18);
    assert_eq!(v["all_primitive"], Value::Bool(true));
}

#[test]
fn c2_counterexample_is_bounded_but_not_subtraction_free() {
    let out = run(&["check", "--type", "C2", "--ratio", "x1*x3*x5/(x2*x4*x6)", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "bounded");
    assert_eq!(v["integral"], Value::Bool(false));
    assert_eq!(v["subtraction_free"]["subtraction_free"], Value::Bool(false));
    let halves = v["lambda"].as_array().unwrap().iter().filter(|x| *x == "1/2").count();
    assert_eq!(halves, 3);
}

#[test]
fn unbounded_ratio_exits_with_one() {
    let out = run(&["check", "--gr", "3", "6", "--ratio", "p[124]*p[356]/(p[123]*p[456])", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["verdict"], "unbounded");
}

#[test]
fn usage_errors_exit_with_two() {
    let unknown = run(&["check", "--type", "A2", "--ratio", "x1/q7"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("q7"));
    assert_eq!(run(&["uvars"]).status.code(), Some(2));
    assert_eq!(run(&["uvars", "--type", "A2", "--gr", "3", "6"]).status.code(), Some(2));
    assert_eq!(run(&["cone", "--gr", "4", "8"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn certificates_replay_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    for (ratio, code) in [("p[135]*p[234]/(p[235]*p[134])", 0), ("p[124]*p[356]/(p[123]*p[456])", 1)] {
        let path = dir.path().join("cert.json");
        let out = run(&["check", "--gr", "3", "6", "--ratio", ratio, "--certificate-out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(code));
        let replay = run(&["verify", "--certificate", path.to_str().unwrap(), "--format", "json"]);
        assert_eq!(replay.status.code(), Some(0), "{}", String::from_utf8_lossy(&replay.stderr));
        assert_eq!(json(&replay)["replayed"], Value::Bool(true));

        let mut cert: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        cert["verdict"] = Value::from(if code == 0 { "unbounded" } else { "bounded" });
        std::fs::write(&path, cert.to_string()).unwrap();
        let replay = run(&["verify", "--certificate", path.to_str().unwrap(), "--format", "json"]);
        assert_ne!(replay.status.code(), Some(0));
    }
}

#[test]
fn cone_cache_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["cone", "--gr", "3", "7", "--format", "json"];
    let first = run_env(&args, Some(dir.path()));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    let second = run_env(&args, Some(dir.path()));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(json(&first)["orbits"].as_array().unwrap().len(), 6);
}

#[test]
fn json_output_is_deterministic() {
    let args = ["check", "--type", "D4", "--frozen", "2", "--ratio", "x1*x5/(x2*x9)", "--format", "json"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn factor_into_primitives() {
    let out = run(&["factor", "--gr", "3", "6", "--ratio", "p[135]*p[234]*p[245]*p[236]/(p[235]*p[134]*p[246]*p[235])", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let total: i64 = v["factors"].as_array().unwrap().iter().map(|f| f["multiplicity"].as_i64().unwrap()).sum();
    assert_eq!(total, 2);
}

#[test]
fn seed_file_source() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a2.json");
    std::fs::write(
        &path,
        r#"{"nodes":[{"name":"a"},{"name":"b"},{"name":"f","frozen":true}],
            "arrows":[{"from":"a","to":"b","mult":1},{"from":"f","to":"a","mult":1}]}"#,
    )
    .unwrap();
    let out = run(&["uvars", "--seed", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["uvars"].as_array().unwrap().len(), 5);
    assert_eq!(v["full_rank"], Value::Bool(true));
}

#[test]
fn u_equation_suite() {
    let out = run(&["verify", "--suite", "u-equations", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], Value::Bool(true));
}

#[test]
fn text_output() {
    let out = run(&["uvars", "--type", "C2", "--format", "text"]);
    let s = String::from_utf8(out.stdout).unwrap();
    assert_eq!(s.lines().count(), 6);
    assert!(s.lines().all(|l| l.starts_with("v_x[")));
}
