use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn gnoop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gnoop")).args(args).env("GNOOP_COLOR", "0").output().unwrap()
}

fn run(args: &[&str]) -> (i32, String) {
    let out = gnoop(args);
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--json", "--stable"]);
    let (code, out) = run(&all);
    (code, serde_json::from_str(&out).unwrap())
}

fn path(name: &str) -> String {
    fixture(name).to_str().unwrap().to_string()
}

#[test]
fn check_javac() {
    let (code, out) = run(&["check", &path("javac.gnoop")]);
    assert_eq!(code, 0);
    assert_eq!(out, "well-formed: 3 constructors\n");
}

#[test]
fn check_reports_locations() {
    let (code, v) = json(&["check", &path("broken.gnoop")]);
    assert_eq!(code, 1);
    assert_eq!(v["ok"], false);
    let d = &v["diagnostics"][0];
    assert_eq!(d["code"], "E121");
    assert_eq!((d["line"].as_u64(), d["column"].as_u64()), (Some(10), Some(12)));
}

#[test]
fn subsign_with_chain() {
    let (code, v) = json(&["subsign", &path("javac_top.gnoop"), "C<Int>", "A<C<Int>>"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["holds"], true);
    assert_eq!(v["result"]["chain"], serde_json::json!(["C<Int>", "B<Int>", "A<C<Int>>"]));
    let (code, v) = json(&["subsign", &path("javac_top.gnoop"), "A<C<Int>>", "C<Int>"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["holds"], false);
}

#[test]
fn unknown_names_in_arguments() {
    let (code, v) = json(&["subsign", &path("javac.gnoop"), "C<Int>", "A<C<Int>>"]);
    assert_eq!(code, 1);
    assert_eq!(v["diagnostics"][0]["code"], "E100");
}

#[test]
fn expansive_is_a_warning_unless_strict() {
    let (code, out) = run(&["expansive", &path("recur.gnoop")]);
    assert_eq!(code, 0);
    assert!(out.contains("warning[E250]") && out.contains("(C,0) -> (C,0)"));
    let (code, _) = run(&["expansive", &path("recur.gnoop"), "--strict"]);
    assert_eq!(code, 1);
    let (code, v) = json(&["expansive", &path("javac.gnoop"), "--strict"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["expansive"], false);
}

#[test]
fn closure_with_fuel() {
    let (code, v) = json(&["closure", &path("recur.gnoop"), "C<Int>", "--fuel", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["exhausted_fuel"], true);
    assert_eq!(v["result"]["closure"].as_array().unwrap().len(), 5);
    assert_eq!(v["diagnostics"][0]["code"], "E251");
    let (_, v) = json(&["closure", &path("javac.gnoop"), "C<Int>", "--inject-top"]);
    // Int is still undeclared.
    assert_eq!(v["diagnostics"][0]["code"], "E100");
    let (_, v) = json(&["closure", &path("javac_top.gnoop"), "C<Int>"]);
    let mut got: Vec<String> =
        v["result"]["closure"].as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect();
    got.sort();
    assert_eq!(got, ["A<C<Int>>", "B<Int>", "C<Int>", "Object"]);
}

#[test]
fn instantiate_pair() {
    let (code, v) = json(&["instantiate", &path("pair.gnoop"), "Pair<Int,Bool>"]);
    assert_eq!(code, 0);
    let sig = &v["result"]["signature"];
    assert_eq!(sig["fields"][1]["type"], "Bool");
    assert_eq!(sig["methods"][0]["ret"], "Pair<Bool,Int>");
}

#[test]
fn erase_and_inject_top() {
    let (code, _) = run(&["erase", &path("javac.gnoop")]);
    assert_eq!(code, 1);
    let (code, out) = run(&["erase", &path("javac.gnoop"), "--inject-top"]);
    assert_eq!(code, 0);
    assert!(out.contains("constructor B<> extends { A } {}"));
    let (code, v) = json(&["erase", &path("pair.gnoop"), "Pair<Int,Bool>"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["name"], "Pair");
    assert_eq!(v["result"]["theorem_ok"], true);
}

#[test]
fn validate_bounds() {
    let (code, v) = json(&["validate", &path("enum.gnoop"), "Enum<Object>"]);
    assert_eq!(code, 1);
    assert_eq!(v["diagnostics"][0]["code"], "E210");
    let (code, _) = run(&["validate", &path("enum.gnoop"), "Enum<MyEnum>"]);
    assert_eq!(code, 0);
    let (code, _) = run(&["validate", &path("enum.gnoop")]);
    assert_eq!(code, 0);
}

#[test]
fn enumerate_and_denote() {
    let (_, v) = json(&["enumerate", &path("pair.gnoop"), "--depth", "0"]);
    assert_eq!(v["result"]["names"], serde_json::json!(["Bool", "Int", "Object"]));
    let (_, v) = json(&["enumerate", &path("enum.gnoop"), "--depth", "1", "--valid-only"]);
    assert!(!v["result"]["names"].as_array().unwrap().iter().any(|n| n == "Enum<Object>"));
    let (_, v) = json(&["denote", &path("pair.gnoop"), "Object", "--depth", "1"]);
    assert_eq!(v["result"]["universe_size"], 15);
    assert_eq!(v["result"]["denotation"].as_array().unwrap().len(), 15);
    let (code, v) = json(&["enumerate", &path("pair.gnoop"), "--depth", "3", "--cap", "100"]);
    assert_eq!(code, 1);
    assert_eq!(v["diagnostics"][0]["code"], "E231");
}

#[test]
fn theorem_check_fixtures() {
    let (code, v) = json(&["theorem-check", &path("pair.gnoop")]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["counterexample"], Value::Null);
    let (code, v) = json(&["theorem-check", &path("broken.gnoop"), "--depth", "1"]);
    assert_eq!(code, 1);
    assert_eq!(v["diagnostics"][0]["code"], "E230");
    assert_eq!(v["result"]["counterexample"]["sub"], "Broken<Int>");
    assert_eq!(v["result"]["counterexample"]["sup"], "List<Int>");
}

#[test]
fn usage_and_parse_failures_exit_2() {
    assert_eq!(gnoop(&["check"]).status.code(), Some(2));
    assert_eq!(gnoop(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["check", "/nonexistent/x.gnoop"]).0, 2);
    let dir = std::env::temp_dir().join(format!("gnoop-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.gnoop");
    std::fs::write(&bad, "constructor A<T> extends {} {\n  field f T;\n}\n").unwrap();
    let (code, v) = json(&["check", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(v["diagnostics"][0]["code"], "E000");
    assert_eq!(v["diagnostics"][0]["line"], 2);
    assert_eq!(run(&["subsign", &path("pair.gnoop"), "Pair<Int", "Int"]).0, 2);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn json_type_names_reparse() {
    let env = gnoop_core::fixtures::javac_with_top();
    let (_, v) = json(&["closure", &path("javac_top.gnoop"), "C<Int>"]);
    for n in v["result"]["closure"].as_array().unwrap() {
        let t = gnoop_core::parse_type_name(n.as_str().unwrap(), &env).unwrap();
        assert_eq!(t.to_string(), n.as_str().unwrap());
    }
}

#[test]
fn timestamp_only_without_stable() {
    let (_, out) = run(&["check", &path("pair.gnoop"), "--json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["timestamp"].is_u64());
}
