use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use qudit_graphs::entangle::psi_state;
use qudit_graphs::io::{graph_from_json, parse_state, write_circuit, write_state};
use qudit_graphs::Field;
use serde_json::Value;
use tempfile::TempDir;

fn qgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgraph")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const FOUR_QUDIT: &str = "\
field 2 2 3
qudits 4
init s s 0 0
C 1 3 1
C 1 4 1
C 2 3 1
C 2 4 2
C 3 1 3
";

#[test]
fn normalize_four_qudit_circuit() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "four.txt", FOUR_QUDIT);
    let o = qgraph(&["normalize", path(&f), "--verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["graph"]["S"], serde_json::json!([1, 2]));
    assert_eq!(v["graph"]["O"], serde_json::json!([3, 4]));
    assert_eq!(v["verified"], Value::Bool(true));
}

#[test]
fn normalize_single_gate_and_cancelling_pair() {
    let dir = TempDir::new().unwrap();
    let one = write(&dir, "one.txt", "field 3 1 0\nqudits 2\ninit s 0\nC 1 2 1\n");
    let o = qgraph(&["normalize", path(&one), "--verify"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["graph"]["edges"], serde_json::json!([{"from": 1, "to": 2, "label": 1}]));
    assert_eq!(v["permutation"], serde_json::json!([1, 2]));

    let cancel = write(&dir, "cancel.txt", "field 3 1 0\nqudits 2\ninit s 0\nC 1 2 1\nC 1 2 2\n");
    let o = qgraph(&["normalize", path(&cancel), "--verify", "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(!text.contains("edge"), "{text}");
    assert!(text.contains("verified true"));
}

#[test]
fn normalize_dot_output() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "four.txt", FOUR_QUDIT);
    let o = qgraph(&["normalize", path(&f), "--format", "dot"]);
    let dot = stdout(&o);
    assert!(dot.contains("digraph"));
    assert!(dot.contains("shape=box") && dot.contains("shape=circle"));
}

#[test]
fn normalize_round_trip_is_stable() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "c.txt", "field 5 1 0\nqudits 5\ninit 0 s 0 s 0\nC 2 1 3\nC 4 2 1\nC 1 5 2\nC 5 4 4\nC 3 2 1\n");
    let first: Value = serde_json::from_str(&stdout(&qgraph(&["normalize", path(&f)]))).unwrap();
    let graph = graph_from_json(&first["graph"].to_string()).unwrap();
    let again = write(&dir, "again.txt", &write_circuit(&graph.circuit()));
    let second: Value = serde_json::from_str(&stdout(&qgraph(&["normalize", path(&again)]))).unwrap();
    assert_eq!(first["graph"], second["graph"]);
    assert_eq!(second["permutation"], serde_json::json!([1, 2, 3, 4, 5]));
}

#[test]
fn parse_and_usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.txt", "field 2 2 3\nqudits 2\ninit s 0\nC 1 2 9\n");
    let o = qgraph(&["normalize", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    let fourier = write(&dir, "h.txt", "field 3 1 0\nqudits 2\ninit s 0\nH 1\n");
    assert_eq!(qgraph(&["normalize", path(&fourier)]).status.code(), Some(2));
    assert_eq!(qgraph(&["normalize", "/nonexistent/file"]).status.code(), Some(2));
    assert_eq!(qgraph(&["no-such-verb"]).status.code(), Some(2));
    assert_eq!(qgraph(&["classify", "6", "--dim", "2"]).status.code(), Some(2));
}

#[test]
fn resource_guard_exits_3() {
    let dir = TempDir::new().unwrap();
    let init = vec!["s"; 30].join(" ");
    let big = write(&dir, "big.txt", &format!("field 2 1 0\nqudits 30\ninit {init}\n"));
    assert_eq!(qgraph(&["simulate", path(&big)]).status.code(), Some(3));
    assert_eq!(qgraph(&["relations-test", "--dims", "11"]).status.code(), Some(3));
    assert_eq!(qgraph(&["make-mes", "2000000"]).status.code(), Some(3));
}

#[test]
fn make_and_verify_mes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("m12.txt");
    let o = qgraph(&["make-mes", "12", "-o", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# dim 12 qudits 4\n"));
    let o = qgraph(&["verify-mes", path(&out), "--tol", "1e-9"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], Value::Bool(true));
    assert_eq!(v["bipartitions"].as_array().unwrap().len(), 7);

    let o = qgraph(&["make-mes", "6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("conjectured not to exist"));
}

#[test]
fn verify_mes_on_psi_and_product() {
    let dir = TempDir::new().unwrap();
    let f = Arc::new(Field::of_order(4).unwrap());
    let psi = psi_state(&f, f.elem(2).unwrap()).unwrap();
    let p = write(&dir, "psi.txt", &write_state(psi.register(), &["psi(2)".into()]));
    assert_eq!(qgraph(&["verify-mes", path(&p)]).status.code(), Some(0));
    let trivial = psi_state(&f, f.elem(1).unwrap()).unwrap();
    let p = write(&dir, "trivial.txt", &write_state(trivial.register(), &[]));
    let o = qgraph(&["verify-mes", path(&p)]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], Value::Bool(false));
}

#[test]
fn classify_counts() {
    for (n, types) in [(2, 1), (3, 1), (4, 2), (5, 2)] {
        let o = qgraph(&["classify", &n.to_string(), "--dim", "2"]);
        assert_eq!(o.status.code(), Some(0));
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["type_count"], types, "N={n}");
    }
    let o = qgraph(&["classify", "4", "--field", "3,1,0", "--format", "text"]);
    assert!(stdout(&o).contains("2 types"));
}

#[test]
fn dual_check_verdicts() {
    assert_eq!(qgraph(&["dual-check", "--field", "3,1"]).status.code(), Some(0));
    let o = qgraph(&["dual-check", "--field", "2,3"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(|r| !r["counterexample"].is_null()));

    let dir = TempDir::new().unwrap();
    let g = r#"{"field":{"p":2,"n":2,"poly":3},"qudits":4,"S":[1,2],"O":[3,4],
        "edges":[{"from":1,"to":3,"label":1},{"from":1,"to":4,"label":1},
                 {"from":2,"to":3,"label":1},{"from":2,"to":4,"label":2}]}"#;
    let p = write(&dir, "g.json", g);
    let o = qgraph(&["dual-check", "--graph", path(&p)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["signature_match"], Value::Bool(true));
}

#[test]
fn relations_test_is_deterministic() {
    let args = ["relations-test", "--dims", "2,3,9", "--samples", "40", "--seed", "11"];
    let a = qgraph(&args);
    let b = qgraph(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["all_pass"], Value::Bool(true));
}

#[test]
fn simulate_writes_a_state_file() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "bell.txt", "field 3 1 0\nqudits 2\ninit s 0\nC 1 2 1\n");
    let out = dir.path().join("bell.state");
    assert_eq!(qgraph(&["simulate", path(&c), "-o", path(&out)]).status.code(), Some(0));
    let reg = parse_state(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(reg.support(1e-12), vec![0, 4, 8]);
}
