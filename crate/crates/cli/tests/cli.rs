use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadspec")).args(args).env_remove("QUADSPEC_WORKERS").output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = run(&all);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

// The commands below are the ones shown in README.md.

#[test]
fn readme_cst() {
    let v = json(&["cst", "--alpha", "[0; | Y]", "--f", "[0; | Y^2]"]);
    assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"exponent":2,"value":"q^-2"}"#);
}

#[test]
fn readme_spectrum_schema() {
    let v = json(&["spectrum", "--alpha", "[0; | Y, Y^2]"]);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        [
            "alpha",
            "contains_zero",
            "exponents_below_bound",
            "hall_bound_coarse",
            "hall_start",
            "hurwitz_exponent",
            "q",
            "zero_is_axiomatic"
        ]
    );
    assert_eq!(v["hall_start"], 9);
    assert_eq!(v["hall_bound_coarse"], 12);
    assert_eq!(v["hurwitz_exponent"], 3);
    assert_eq!(v["exponents_below_bound"], serde_json::json!([3, 4, 5, 6, 7, 8]));
    assert_eq!(v["contains_zero"], true);
    assert_eq!(v["zero_is_axiomatic"], true);
}

#[test]
fn readme_spectrum_csv() {
    let out = run(&["spectrum", "--alpha", "[0; | Y, Y^2]", "--format", "csv", "--max-exponent", "10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "exponent,value,member");
    assert_eq!(lines[1], "2,q^-2,false");
    assert_eq!(lines.len(), 10);
    assert!(lines.iter().skip(2).all(|l| l.ends_with(",true")));
}

#[test]
fn readme_spectrum_table_flags_zero() {
    let out = run(&["spectrum", "--alpha", "[0; | Y, Y^2]"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("axiomatic"));
    assert!(text.contains("(coarse)") && text.contains("(refined)"));
}

#[test]
fn readme_small_commands() {
    assert_eq!(json(&["height", "--alpha", "[0; | Y, Y^2]"])["exponent"], -2);
    assert_eq!(json(&["conjugate", "--alpha", "[Y; | Y^2, Y]"])["conjugate"], "[0; | Y^2, Y]");
    assert_eq!(json(&["--q", "3", "conjugate", "--alpha", "[Y; | 2*Y, Y]"])["conjugate"], "[0; | Y, 2*Y]");
    let m = json(&["minpoly", "--alpha", "[0; | Y, Y^2]"]);
    assert_eq!((&m["a"], &m["b"], &m["c"]), (&"1".into(), &"Y^2".into(), &"Y".into()));
    assert_eq!(json(&["equiv", "--f", "[0; | Y, Y^2]", "--g", "[0; | Y^2, Y]"])["equivalent"], true);
    assert_eq!(json(&["dist", "--f", "[0; | Y]", "--g", "[0; | Y, Y^2]"])["exponent"], 3);
    assert_eq!(json(&["hurwitz", "--alpha", "[0; | Y, Y^2]"])["exponent"], 3);
    let h = json(&["hall-bound", "--alpha", "[0; | Y, Y^2]"]);
    assert_eq!((h["coarse"].as_i64(), h["refined"].as_i64()), (Some(12), Some(9)));
    let s = json(&["stats", "--alpha", "[0; | Y, Y^2]"]);
    assert_eq!((s["max_degree"].as_i64(), s["max_pair_degree"].as_i64(), s["min_degree"].as_i64()), (Some(2), Some(3), Some(1)));
}

#[test]
fn readme_extension_field() {
    let v = json(&["--q", "4", "--modulus", "Y^2+Y+1", "spectrum", "--alpha", "[0; | Y]"]);
    assert_eq!(v["q"], 4);
    assert_eq!(v["hurwitz_exponent"], 2);
}

#[test]
fn readme_oracle_check() {
    let v = json(&["oracle-check", "--alpha", "[0; | Y]", "--f", "[0; | Y^2, Y+1]"]);
    assert_eq!(v["verdict"], "PASS");
    assert_eq!(v["fast_exponent"], 3);
    assert_eq!(v["violations"], 0);
}

#[test]
fn random_oracle_input_is_seeded() {
    let a = json(&["oracle-check", "--alpha", "[0; | Y]", "--seed", "3"]);
    let b = json(&["oracle-check", "--alpha", "[0; | Y]", "--seed", "3", "--workers", "2"]);
    assert_eq!(a["f"], b["f"]);
    assert_ne!(a["verdict"], "FAIL");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["height", "--alpha", "[0; | 1]"]).status.code(), Some(2));
    assert_eq!(run(&["--q", "6", "height", "--alpha", "[0; | Y]"]).status.code(), Some(2));
    assert_eq!(run(&["height", "--alpha", "[0; Y"]).status.code(), Some(2));
    assert_eq!(run(&["cst", "--alpha", "[0; | Y]", "--f", "[Y; Y | Y]"]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--alpha", "[0; | Y, Y^2]", "--max-exponent", "5"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}
