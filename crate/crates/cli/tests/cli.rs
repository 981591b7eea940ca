use std::process::{Command, Output};

use serde_json::Value;

fn overrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_overrank")).args(args).output().expect("run overrank")
}

fn schema() -> Value {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schema/report.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn schema_errors(instance: &Value) -> Vec<String> {
    let v = jsonschema::validator_for(&schema()).expect("schema compiles");
    v.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path())).collect()
}

#[test]
fn verify_small_modulus() {
    let out = overrank(&["verify", "thm1", "--M", "3", "--order", "60"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(out.stderr.is_empty());
}

#[test]
fn json_reports_match_schema() {
    let out = overrank(&["verify", "thm2", "--M", "4", "--order", "30", "--json", "--jobs", "2"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(schema_errors(&v), Vec::<String>::new());
    let arr = v.as_array().unwrap();
    assert!(arr.iter().any(|r| r["identity_id"] == "m2_pair"));
    assert!(arr.iter().all(|r| r["status"] == "pass" && r["order"] == 30));
}

#[test]
fn schema_rejects_malformed_reports() {
    let bad = serde_json::json!([{
        "identity_id": "x", "parameters": {"a": 1}, "status": "ok",
        "first_discrepancy": null, "elapsed_ms": 0, "order": 5
    }]);
    assert_eq!(schema_errors(&bad).len(), 2);
}

#[test]
fn sequential_and_parallel_agree() {
    let strip = |o: Output| {
        let mut v: Value = serde_json::from_slice(&o.stdout).unwrap();
        for r in v.as_array_mut().unwrap() {
            r["elapsed_ms"] = Value::from(0);
        }
        v
    };
    let a = strip(overrank(&["verify", "thm1", "--M", "5", "--order", "24", "--json", "--jobs", "1"]));
    let b = strip(overrank(&["verify", "thm1", "--M", "5", "--order", "24", "--json"]));
    assert_eq!(a, b);
}

#[test]
fn syntax_errors_point_at_the_argument() {
    let out = overrank(&["expand", "h(1 + q; q)", "--order", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1, column 3"), "{err}");
    assert!(err.contains("must be monomials"), "{err}");
}

#[test]
fn poles_name_the_subexpression() {
    let out = overrank(&["expand", "J(1) * m(-1, q, q^2)", "--order", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("m(-1, q, q^2)") && err.contains("pole"), "{err}");
}

#[test]
fn expand_json() {
    let out = overrank(&["expand", "J(1)", "--order", "8", "--json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["series"], "1 - q - q^2 + q^5 + q^7 + O(q^8)");
    let exps: Vec<i64> = v["coefficients"].as_array().unwrap().iter().map(|c| c["exponent"].as_i64().unwrap()).collect();
    assert_eq!(exps, [0, 1, 2, 5, 7]);
}

#[test]
fn oracle_dump() {
    let out = overrank(&["oracle", "--nmax", "4"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["which"], "rank");
    assert_eq!(v["n_max"], 4);
    // pbar(4) = 14
    let total: u64 = v["counts"][4].as_object().unwrap().values().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(total, 14);
}

#[test]
fn selection_flags_only_for_formulas() {
    let out = overrank(&["verify", "section4", "--M", "3"]);
    assert_eq!(out.status.code(), Some(2));
}
