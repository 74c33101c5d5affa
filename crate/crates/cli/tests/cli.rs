use holant::fixtures;
use holant::io::dump_instance;
use holant::rational::{self, ratio};
use holant_cli::{run, Outcome};
use serde_json::Value;
use std::process::Command;

fn call(args: &[&str], input: &str) -> (i32, Value) {
    let mut argv = vec!["holant"];
    argv.extend_from_slice(args);
    let Outcome { code, stdout } = run(argv, &mut input.as_bytes());
    (code, serde_json::from_str(&stdout).unwrap_or(Value::Null))
}

fn r(v: &Value) -> holant::Rational {
    rational::parse(v.as_str().unwrap()).unwrap()
}

const EDGE: &str = r#"{"vertices":["u","v"],"edges":[["u","v"]],"signatures":{"u":[1,1],"v":[1,1]}}"#;

#[test]
fn count_on_edgeless_document() {
    let (code, v) = call(
        &["count", "--epsilon", "0.1"],
        r#"{"vertices":["a","b"],"edges":[],"signatures":{"a":[1],"b":[1]}}"#,
    );
    assert_eq!(code, 0);
    assert_eq!(v["zhat"], "1/1");
}

#[test]
fn oracle_ratio_and_estimate_agree() {
    let (code, v) = call(&["oracle", "ratio", "--edge", "0"], EDGE);
    assert_eq!(code, 0);
    assert_eq!(v["r"], "1/1");
    let (code, v) = call(&["ratio", "--edge", "0", "--epsilon", "1/5"], EDGE);
    assert_eq!(code, 0);
    let rhat = r(&v["rhat"]);
    assert!(rhat >= ratio(4, 5) && rhat <= ratio(6, 5), "{rhat}");
    for key in ["edge", "rhat", "epsilon", "ell", "rounds", "lp_nodes"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn oracle_count_and_marginal() {
    let doc = dump_instance(&fixtures::cycle_matchings(4));
    let (_, v) = call(&["oracle", "count"], &doc);
    assert_eq!(v["z"], "7/1");
    let (code, v) = call(&["oracle", "marginal", "--target", "0=1", "--condition", "2=0"], &doc);
    assert_eq!(code, 0);
    assert_eq!(v["probability"], "1/5");
}

#[test]
fn verify_reports_the_amenability_violation() {
    let doc = dump_instance(fixtures::amenability_counterexample().instance());
    let (code, v) = call(&["verify", "--ell", "1"], &doc);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    let amen = checks.iter().find(|c| c["informational"] == true).unwrap();
    assert_eq!(amen["passed"], false);
    let text = amen["failures"].to_string();
    assert!(text.contains("10301/24622 > mu^tau(1) = 14321/38742"), "{text}");
}

#[test]
fn tree_and_lp_check() {
    let doc = dump_instance(fixtures::amenability_counterexample().instance());
    let (code, v) = call(&["tree", "--ell", "1", "--dump"], &doc);
    assert_eq!(code, 0);
    assert_eq!(
        v["nodes"].as_array().unwrap().len(),
        v["node_count"].as_u64().unwrap() as usize
    );
    let (code, v) = call(
        &["lp-check", "--ell", "2", "--rminus", "0", "--rplus", "100", "--dump-lp"],
        &doc,
    );
    assert_eq!(code, 0);
    assert_eq!(v["feasible"], true);
    assert!(v["lp"].as_str().unwrap().contains("ps:0"));
    let (_, v) = call(&["lp-check", "--ell", "2", "--rminus", "50", "--rplus", "100"], &doc);
    assert_eq!(v["feasible"], false);
}

#[test]
fn exit_codes_by_error_class() {
    assert_eq!(call(&["count", "--epsilon", "0.1"], "{\"vertices\": [").0, 2);
    let gap = r#"{"vertices":["v"],"edges":[],"half_edges":[["v"]],"signatures":{"v":[1,0,1]}}"#;
    let (code, v) = call(&["count", "--epsilon", "0.1"], gap);
    assert_eq!(code, 3);
    assert_eq!(v["error"]["class"], "validation");
    let (code, v) = call(&["oracle", "count", "--max-oracle-edges", "0"], EDGE);
    assert_eq!(code, 4);
    assert_eq!(v["error"]["class"], "budget");
    let doc = dump_instance(fixtures::amenability_counterexample().instance());
    assert_eq!(call(&["tree", "--ell", "3", "--max-tree-nodes", "5"], &doc).0, 4);
    assert_eq!(call(&["ratio", "--edge", "9", "--epsilon", "0.1"], EDGE).0, 2);
    assert_eq!(call(&["frobnicate"], EDGE).0, 2);
}

#[test]
fn output_is_deterministic() {
    let doc = dump_instance(&fixtures::path_matchings(3));
    let a = run(["holant", "count", "--epsilon", "0.24"], &mut doc.as_bytes());
    let b = run(["holant", "count", "--epsilon", "0.24"], &mut doc.as_bytes());
    assert_eq!(a, b);
}

#[test]
fn binary_reads_a_file() {
    let path = std::env::temp_dir().join(format!("holant-cli-{}.json", std::process::id()));
    std::fs::write(&path, EDGE).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_holant"))
        .args(["oracle", "count", "--input"])
        .arg(&path)
        .output()
        .unwrap();
    std::fs::remove_file(&path).ok();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["z"], "2/1");
}
