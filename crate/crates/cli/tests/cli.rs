//! Runs the `crnorm` binary. Golden files live in `tests/golden`; set
//! `CRNORM_BLESS=1` to rewrite them.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn crnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crnorm")).args(args).output().expect("binary runs")
}

fn json_of(args: &[&str]) -> (Value, String, i32) {
    let out = crnorm(args);
    let text = String::from_utf8(out.stdout).expect("utf8");
    let v = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{args:?}: {e}\n{text}"));
    (v, text, out.status.code().expect("exit code"))
}

fn corpus_keys() -> Vec<String> {
    let (v, _, code) = json_of(&["corpus-list", "--json"]);
    assert_eq!(code, 0);
    v["result"]["keys"].as_array().unwrap().iter().map(|k| k.as_str().unwrap().to_string()).collect()
}

fn golden_path(command: &str, key: &str) -> PathBuf {
    let name: String = key.chars().map(|c| if c.is_ascii_alphanumeric() || c == '=' { c } else { '_' }).collect();
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(command).join(format!("{name}.json"))
}

fn check_golden(command: &str, key: &str) {
    let out = crnorm(&[command, key, "--json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let path = golden_path(command, key);
    if std::env::var_os("CRNORM_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &text).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(text, want, "{command} {key} differs from {}", path.display());
}

#[test]
fn classify_goldens() {
    for key in corpus_keys() {
        check_golden("classify", &key);
    }
}

#[test]
fn nondeg_goldens() {
    for key in corpus_keys() {
        check_golden("nondeg", &key);
    }
}

#[test]
fn invariants_goldens() {
    for key in ["lightcone", "m1", "m2", "m3", "m4", "model:Ai2"] {
        check_golden("invariants", key);
    }
}

#[test]
fn normalize_goldens() {
    for key in ["lightcone", "model:Ai1:gamma=1", "model:Ai3"] {
        check_golden("normalize", key);
    }
}

#[test]
fn json_output_round_trips() {
    for key in corpus_keys() {
        for command in ["classify", "nondeg"] {
            let (v, text, _) = json_of(&[command, &key, "--json"]);
            let again = serde_json::to_string_pretty(&v).unwrap() + "\n";
            assert_eq!(again, text, "{command} {key}");
            let reparsed: Value = serde_json::from_str(&again).unwrap();
            assert_eq!(reparsed, v);
        }
    }
}

#[test]
fn known_values() {
    let (v, _, code) = json_of(&["classify", "lightcone", "--json"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["type"], "A.i.2");
    assert_eq!(v["backend"], "exact");

    let (v, _, _) = json_of(&["invariants", "m3", "--json"]);
    assert_eq!(v["result"]["delta22"], 0);
    assert_eq!(v["result"]["eps22"], 1);

    let (v, _, _) = json_of(&["nondeg", "freeman:(0,i,i)", "--json"]);
    assert_eq!(v["result"]["levi_signature"], serde_json::json!([0, 0, 2]));
    assert_eq!(v["result"]["k"], 3);

    let (v, _, _) = json_of(&["classify", "model:Aii3:lambda=(1+i)", "--json"]);
    assert_eq!(v["result"]["type"], "A.ii.3");
    assert_eq!(v["result"]["invariants"]["lambda"], "(1+1*i)");
}

#[test]
fn exit_codes() {
    let out = crnorm(&["classify", "z1 + q"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("column 6"));
    assert_eq!(crnorm(&["classify", "bogus:key"]).status.code(), Some(2));
    assert_eq!(crnorm(&["classify", "i*z1*zb1"]).status.code(), Some(2));
    assert_eq!(crnorm(&["classify", "heisenberg"]).status.code(), Some(3));
    assert_eq!(crnorm(&["invariants", "model:Aii2"]).status.code(), Some(3));
    // The worst failure wins when several inputs are given.
    assert_eq!(crnorm(&["classify", "m1", "heisenberg", "z1 + q"]).status.code(), Some(3));

    let (v, _, code) = json_of(&["classify", "heisenberg", "--json"]);
    assert_eq!(code, 3);
    assert_eq!(v["error"]["kind"], "precondition");
}

#[test]
fn text_output_and_file_inputs() {
    let out = crnorm(&["classify", "z1*zb1 + z1^2*zb2 + zb1^2*z2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "type: A.i.2"), "{text}");

    let dir = std::env::temp_dir().join(format!("crnorm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("germ.txt");
    std::fs::write(&file, "z1*zb1 + z1^2*zb2 + zb1^2*z2\n").unwrap();
    let (from_file, _, _) = json_of(&["classify", &format!("@{}", file.display()), "--json"]);
    let (inline, _, _) = json_of(&["classify", "z1*zb1 + z1^2*zb2 + zb1^2*z2", "--json"]);
    assert_eq!(from_file, inline);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn parallel_matches_sequential() {
    let keys = corpus_keys();
    let args = |par: bool| {
        let mut a: Vec<&str> = vec!["classify", "--json"];
        a.extend(keys.iter().map(String::as_str));
        if par {
            a.push("--parallel");
        }
        String::from_utf8(crnorm(&a).stdout).unwrap()
    };
    assert_eq!(args(false), args(true));
}
