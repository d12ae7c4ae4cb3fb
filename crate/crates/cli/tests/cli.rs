use std::io::Write;
use std::process::{Command, Stdio};

use serde_json::Value;

fn qorbit(args: &[&str]) -> (i32, Value) {
    qorbit_stdin(args, None)
}

fn qorbit_stdin(args: &[&str], input: Option<&str>) -> (i32, Value) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_qorbit"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    if let Some(s) = input {
        child.stdin.take().unwrap().write_all(s.as_bytes()).unwrap();
    }
    let out = child.wait_with_output().unwrap();
    let doc = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), doc)
}

/// Pairs of a JSON map back into the line format.
fn as_text(pairs: &Value) -> String {
    pairs
        .as_array()
        .unwrap()
        .iter()
        .map(|p| format!("{} -> {}", p[0].as_str().unwrap(), p[1].as_str().unwrap()))
        .collect::<Vec<_>>()
        .join(";")
}

#[test]
fn member_with_witness() {
    let (code, doc) = qorbit(&["member", "--gamma", "P,M", "--rho", "IPM"]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"], true);
    assert_eq!(doc["witness"], serde_json::json!([0, 0]));

    let (code, doc) = qorbit(&["member", "--gamma", "IPM", "--rho", "P,M"]);
    assert_eq!(code, 1);
    assert_eq!(doc["result"], false);
}

#[test]
fn pmember_negative_decision() {
    let (code, doc) = qorbit(&["pmember", "--rho", "P", "--map", "0 -> 0"]);
    assert_eq!(code, 1);
    assert_eq!(doc["result"], false);

    let (code, doc) = qorbit(&["pmember", "--rho", "FULL", "--map", "0 -> 0"]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"], true);
}

#[test]
fn malformed_inputs_are_usage_errors() {
    assert_eq!(qorbit(&["member", "--gamma", "QQ", "--rho", "P"]).0, 2);
    assert_eq!(qorbit(&["member", "--gamma", "QQ"]).0, 2);
    assert_eq!(qorbit(&["frobnicate"]).0, 2);
    let (code, doc) = qorbit(&["orbitals", "--map", "0 -> 1;1 -> x"]);
    assert_eq!(code, 2);
    let diag = doc["diagnostics"][0].as_str().unwrap();
    assert!(diag.contains("line 2") && diag.contains('x'), "{diag}");
    assert_eq!(qorbit(&["orbitals", "--map", "0 -> 1;1 -> 0"]).0, 2);
    assert_eq!(qorbit(&["member", "--gamma", "P,P", "--rho", "P"]).0, 2);
}

#[test]
fn non_rich_base_is_a_domain_error() {
    let (code, doc) = qorbit(&["amalgamate", "--rho", "P,M", "--p0", "0 -> 1", "--p1", "0 -> 1", "--p2", "0 -> 1"]);
    assert_eq!(code, 3);
    assert_eq!(doc["result"], Value::Null);
    assert!(doc["diagnostics"][0].as_str().unwrap().contains("p0 is not rich"));
}

#[test]
fn amalgam_witness_revalidates() {
    let (code, doc) = qorbit(&["amalgamate", "--plus", "--p0", "0 -> 1", "--p1", "0 -> 1;1 -> 2", "--p2=-1 -> 0;0 -> 1"]);
    assert_eq!(code, 0);
    let p3 = as_text(&doc["result"]["p3"]);
    assert!(p3.contains("0 -> 1") && p3.contains("1 -> 2"));
    let psi = &doc["result"]["psi"];
    assert_eq!(psi.as_array().unwrap().len(), 3);
    let (code, orb) = qorbit(&["orbitals", &format!("--map={p3}")]);
    assert_eq!(code, 0);
    assert_eq!(orb["result"].as_array().unwrap().len(), 1);
}

#[test]
fn richify_output_is_a_member() {
    let (code, doc) = qorbit(&["--seed", "7", "richify", "--rho", "P,M", "--map", "0 -> 1"]);
    assert_eq!(code, 0);
    let rich = as_text(&doc["result"]);
    let (code, again) = qorbit(&["pmember", "--rho", "P,M", "--map", &rich]);
    assert_eq!(code, 0);
    assert_eq!(again["result"], true);
    let (_, same) = qorbit(&["--seed", "7", "richify", "--rho", "P,M", "--map", "0 -> 1"]);
    assert_eq!(same, doc);
}

#[test]
fn maps_from_files_and_stdin() {
    let dir = std::env::temp_dir().join(format!("qorbit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("f.txt");
    std::fs::write(&f, "# two orbitals\n0 -> 1\n5 -> 4\n").unwrap();
    let (code, doc) = qorbit(&["orbitals", "--map", f.to_str().unwrap()]);
    assert_eq!(code, 0);
    let colors: Vec<&str> = doc["result"].as_array().unwrap().iter().map(|c| c["color"].as_str().unwrap()).collect();
    assert_eq!(colors, ["+", "-"]);
    let (code, piped) = qorbit_stdin(&["orbitals", "--map", "-"], Some("0 -> 1\n5 -> 4\n"));
    assert_eq!(code, 0);
    assert_eq!(piped, doc);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn canonical_forms() {
    let (code, doc) = qorbit(&["canonicalize", "P,P"]);
    assert_eq!(code, 0);
    let canon = doc["result"].as_str().unwrap().to_string();
    let (code, doc) = qorbit(&["check-canonical", &canon]);
    assert_eq!((code, &doc["result"]), (0, &Value::Bool(true)));
    assert_eq!(qorbit(&["check-canonical", "P,P"]).0, 1);
}

#[test]
fn sinf_commands() {
    let (code, doc) = qorbit(&["sinf-member", "--spec", "2:inf", "--map", "1 -> 2"]);
    assert_eq!((code, &doc["result"]), (0, &Value::Bool(true)));
    let (code, doc) = qorbit(&["sinf-member", "--spec", "2:inf", "--map", "1 -> 1"]);
    assert_eq!((code, &doc["result"]), (1, &Value::Bool(false)));
    let (code, doc) = qorbit(&["sinf-generic", "--spec", "3:inf,inf:1"]);
    assert_eq!(code, 0);
    assert!(doc["result"].as_str().unwrap().contains("inf"));
    assert_eq!(qorbit(&["sinf-generic", "--spec", "3:zz"]).0, 2);
}

#[test]
fn bn_commands() {
    let (code, doc) = qorbit(&["bn-member", "--sigma", "2,1", "--word", "P", "--map", "2:0 -> 1:0"]);
    assert_eq!((code, &doc["result"]), (0, &Value::Bool(true)));
    let (code, doc) = qorbit(&["bn-symmetrize", "--sigma", "2,1", "--map", "2:0 -> 1:0"]);
    assert_eq!(code, 0);
    assert!(doc["result"].as_array().unwrap().len() >= 2);
    assert_eq!(qorbit(&["bn-member", "--sigma", "2,2", "--word", "P", "--map", "1:0 -> 2:0"]).0, 2);
    assert_eq!(qorbit(&["bn-member", "--sigma", "2,1,3", "--word", "P", "--map", "1:0 -> 2:0"]).0, 2);
}

#[test]
fn betweenness_cut() {
    let (code, doc) = qorbit(&["betweenness-to-b2", "--map", "0 -> 1;1 -> 0"]);
    assert_eq!(code, 0);
    assert_eq!(doc["witness"]["cut"]["between"], serde_json::json!(["0", "1"]));
    let (code, doc) = qorbit(&["betweenness-to-b2", "--map", "3 -> 3"]);
    assert_eq!(code, 0);
    assert_eq!(doc["witness"]["cut"]["fixed"], "3");
    assert_eq!(qorbit(&["betweenness-to-b2", "--map", "0 -> 0;1 -> 1"]).0, 3);
}
