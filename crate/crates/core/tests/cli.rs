use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use ucp_ergodic::fixtures::e3_component;
use ucp_ergodic::io::parse_problem;

fn problems() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/problems")
}

fn problem(name: &str) -> String {
    problems().join(name).to_string_lossy().into_owned()
}

fn ucp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ucp")).args(args).output().unwrap()
}

fn report(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = ucp(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v)
}

#[test]
fn every_shipped_problem_validates() {
    let mut seen = 0;
    for entry in std::fs::read_dir(problems()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        if v.get("algebra").is_none() {
            continue;
        }
        let (code, r) = report(&["validate", path.to_str().unwrap()]);
        assert_eq!(code, 0, "{}: {r}", path.display());
        assert_eq!(r["status"], "ok");
        seen += 1;
    }
    assert!(seen >= 10);
}

#[test]
fn certify_exit_codes() {
    let (code, r) = report(&["certify", &problem("e3_swap.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["verdict"], "ergodic");
    let (code, r) = report(&["certify", &problem("e3_trivial.json")]);
    assert_eq!(code, 1);
    assert_eq!(r["status"], "negative");
}

#[test]
fn plain_decomposition_leaves_round_trip() {
    let (code, r) = report(&["decompose", &problem("e3_trivial.json"), "--mode", "plain"]);
    assert_eq!(code, 0);
    let leaves = r["result"]["leaves"].as_array().unwrap();
    assert_eq!(leaves.len(), 2);
    let source: Value = serde_json::from_str(&std::fs::read_to_string(problem("e3_trivial.json")).unwrap()).unwrap();
    for leaf in leaves {
        assert!((leaf["weight"].as_f64().unwrap() - 0.5).abs() < 1e-12);
        let doc = json!({"algebra": source["algebra"], "target_dim": source["target_dim"], "map": leaf["map"]});
        let p = parse_problem(&doc.to_string()).unwrap();
        let phi = p.map.unwrap();
        let d = (0..2).map(|k| phi.distance(&e3_component(k))).fold(f64::INFINITY, f64::min);
        assert!(d < 1e-9);
    }
}

#[test]
fn malformed_input_is_located() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"algebra\": {\"blocks\": [2]}, \"target_dim\": 2, \"map\": {\"form\": \"nope\"}}").unwrap();
    let (code, r) = report(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(r["status"], "input_error");
    assert_eq!(r["error"]["pointer"], "/map/form");
    std::fs::write(&bad, "{not json").unwrap();
    let (code, r) = report(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["pointer"], "");
}

#[test]
fn missing_file_and_unknown_command_exit_2() {
    assert_eq!(ucp(&["validate", "/nonexistent/x.json"]).status.code(), Some(2));
    assert_eq!(ucp(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn reports_are_reproducible() {
    let args = ["decompose", &problem("e5_pinching.json"), "--seed", "7", "--format", "json"];
    let a = ucp(&args);
    let b = ucp(&args);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = ucp(&["certify", &problem("e1_identity.json"), "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["command"], "certify");
    assert_eq!(v["result"]["verdict"], "ergodic");
}

#[test]
fn rn_both_directions() {
    let (code, r) = report(&["rn", &problem("e3_trivial.json"), "--forward", &problem("t_half.json")]);
    assert_eq!(code, 0, "{r}");
    let (code, r) = report(&["rn", &problem("e3_swap.json"), "--inverse", &problem("psi_e3_first_block.json"), "--covariant"]);
    assert_eq!(code, 1, "{r}");
    assert_eq!(r["result"]["g_invariant"], false);
}

#[test]
fn text_output_is_readable() {
    let o = ucp(&["commutant", &problem("e3_swap.json")]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("command: commutant"), "{text}");
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Keys of `v` lie in `properties` and cover `required`.
fn keys_match(v: &Value, def: &Value, at: &str) {
    let obj = v.as_object().unwrap_or_else(|| panic!("{at}: not an object"));
    let props = def["properties"].as_object().unwrap();
    for k in obj.keys() {
        assert!(props.contains_key(k), "{at}: key {k} missing from schema");
    }
    for k in def["required"].as_array().into_iter().flatten() {
        assert!(obj.contains_key(k.as_str().unwrap()), "{at}: required key {k} absent");
    }
}

#[test]
fn reports_match_the_schema() {
    let s = schema("report.schema.json");
    let defs = &s["$defs"];
    let cases: Vec<(Vec<String>, &str)> = vec![
        (vec!["validate".into(), problem("e3_swap.json")], "validate"),
        (vec!["dilate".into(), problem("e3_swap.json")], "dilate"),
        (vec!["invariance".into(), problem("e2_uniform_z3.json")], "invariance"),
        (vec!["twirl".into(), problem("e4_pauli_twirl.json")], "twirl"),
        (vec!["commutant".into(), problem("e4_pauli_twirl.json")], "commutant"),
        (vec!["rn".into(), problem("e3_trivial.json"), "--forward".into(), problem("t_half.json")], "rn"),
        (vec!["decompose".into(), problem("e5_pinching_z2.json"), "--mode".into(), "g-invariant".into()], "decompose"),
        (vec!["decompose".into(), problem("e3_trivial.json")], "decompose"),
        (vec!["certify".into(), problem("e3_trivial.json")], "certificate"),
        (vec!["paschke-crosscheck".into(), problem("e3_swap.json")], "paschke"),
        (vec!["lift".into(), problem("lift_qubit.json"), "--kind".into(), "full".into(), "--n".into(), "2".into()], "lift"),
    ];
    for (args, def) in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let (_, r) = report(&refs);
        keys_match(&r, &s, &args[0]);
        keys_match(&r["result"], &defs[def], &args[0]);
    }
    let (_, r) = report(&["validate", "/nonexistent/x.json"]);
    keys_match(&r, &s, "error");
    keys_match(&r["error"], &defs["error"], "error");
}

#[test]
fn shipped_problems_match_the_schema() {
    let s = schema("problem.schema.json");
    for entry in std::fs::read_dir(problems()).unwrap() {
        let path = entry.unwrap().path();
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        if v.get("algebra").is_some() {
            keys_match(&v, &s, &path.display().to_string());
        }
    }
}
