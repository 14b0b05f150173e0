//! End-to-end checks of the executable: exit codes, schema conformance of
//! every JSON output, CSV shapes, and manifest replay determinism.

use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lowlying"))
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("spawn");
    assert!(
        out.status.success(),
        "expected success for {args:?}: status {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8")
}

fn run_err(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().expect("spawn");
    let code = out.status.code().unwrap_or(-1);
    (code, String::from_utf8_lossy(&out.stderr).into_owned())
}

fn schema() -> Value {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../schemas/cli-output.schema.json"
    ))
    .expect("schema file");
    serde_json::from_str(&text).expect("schema parses")
}

/// Structural validation against a schema definition: `required` keys,
/// declared primitive types, `$ref`s into definitions, array items, and
/// enum membership. Covers the subset of JSON Schema the file uses.
fn validate(value: &Value, def: &Value, defs: &Value, path: &str) {
    if let Some(reference) = def.get("$ref").and_then(|r| r.as_str()) {
        let name = reference.rsplit('/').next().unwrap();
        let target = defs.get(name).unwrap_or_else(|| panic!("unknown $ref {reference}"));
        validate(value, target, defs, path);
        return;
    }
    if let Some(ty) = def.get("type").and_then(|t| t.as_str()) {
        let ok = match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.is_i64() || value.is_u64(),
            "boolean" => value.is_boolean(),
            other => panic!("unhandled schema type {other}"),
        };
        assert!(ok, "{path}: expected {ty}, got {value}");
    }
    if let Some(allowed) = def.get("enum").and_then(|e| e.as_array()) {
        assert!(allowed.contains(value), "{path}: {value} not in {allowed:?}");
    }
    if let Some(required) = def.get("required").and_then(|r| r.as_array()) {
        for key in required {
            let key = key.as_str().unwrap();
            assert!(
                value.get(key).is_some(),
                "{path}: missing required key {key} in {value}"
            );
        }
    }
    if let Some(props) = def.get("properties").and_then(|p| p.as_object()) {
        if let Some(obj) = value.as_object() {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    validate(v, sub, defs, &format!("{path}.{key}"));
                }
            }
        }
    }
    if let Some(items) = def.get("items") {
        if let Some(arr) = value.as_array() {
            if let Some(min) = def.get("minItems").and_then(|m| m.as_u64()) {
                assert!(arr.len() as u64 >= min, "{path}: fewer than {min} items");
            }
            if let Some(max) = def.get("maxItems").and_then(|m| m.as_u64()) {
                assert!(arr.len() as u64 <= max, "{path}: more than {max} items");
            }
            for (i, v) in arr.iter().enumerate() {
                validate(v, items, defs, &format!("{path}[{i}]"));
            }
        }
    }
}

fn validate_against(def_name: &str, text: &str) -> Value {
    let schema = schema();
    let defs = schema.get("definitions").expect("definitions");
    let value: Value = serde_json::from_str(text).expect("output parses as JSON");
    validate(&value, defs.get(def_name).expect("definition"), defs, def_name);
    value
}

#[test]
fn fs_indicator_matches_schema_and_expected_values() {
    let out = run_ok(&["fs-indicator", "--dual", "B,2"]);
    let v = validate_against("fsIndicator", &out);
    assert_eq!(v["s"], 1);
    assert_eq!(v["type"], "Symplectic");
    assert_eq!(v["ensemble"], "USp");
    // symplectic dual classifies orthogonal
    let out = run_ok(&["fs-indicator", "--group", "SO,5"]);
    let v = validate_against("fsIndicator", &out);
    assert_eq!(v["s"], -1);
    assert_eq!(v["ensemble"], "SOeven");
    // non-self-dual
    let out = run_ok(&["fs-indicator", "--dual", "A,2"]);
    let v = validate_against("fsIndicator", &out);
    assert_eq!(v["s"], 0);
    assert_eq!(v["type"], "Unitary");
}

#[test]
fn satake_and_phi_match_schema() {
    let out = run_ok(&["satake", "--dual", "A,1", "--lambda", "1,0"]);
    let v = validate_against("satake", &out);
    // S^{-1}(chi_(1,0)) = q^{-1/2} tau_(1,0) over GL2: one term, exp (-1,2)
    let terms = v["result"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["coeff"][0][0], -1);
    assert_eq!(terms[0]["coeff"][0][1], 2);

    let out = run_ok(&["phi", "--group", "GL,3", "--nu", "2"]);
    let v = validate_against("phi", &out);
    // q^{-2}(tau_(2,0,0) + (1-q) tau_(1,1,0)): two support weights
    assert_eq!(v["result"]["terms"].as_array().unwrap().len(), 2);
    assert_eq!(v["value_at_identity"].as_array().unwrap().len(), 0);
}

#[test]
fn tabular_outputs_match_schema() {
    let out = run_ok(&["plancherel-moments", "--dual", "C,1", "--q", "2,3", "--nu-max", "2"]);
    let v = validate_against("plancherelMoments", &out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    for row in v["rows"].as_array().unwrap() {
        assert!(row["abs_err"].as_f64().unwrap() < 1e-8);
    }

    let out = run_ok(&["sato-tate-moments", "--dual", "C,1", "--nu-max", "2"]);
    let v = validate_against("satoTateMoments", &out);
    assert_eq!(v["rows"][1]["beta_exact_rational"][0], -1);

    let out = run_ok(&["st-convergence", "--dual", "C,2", "--nu", "2", "--q", "2,3,5"]);
    let v = validate_against("stConvergence", &out);
    let rows = v["rows"].as_array().unwrap();
    assert!(rows[2]["abs_diff"].as_f64().unwrap() <= rows[0]["abs_diff"].as_f64().unwrap());

    let out = run_ok(&["one-level", "--group", "SO,5", "--conductor", "1e6"]);
    let v = validate_against("oneLevel", &out);
    assert!(v["primes_used"].as_i64().unwrap() > 0);

    let out = run_ok(&["one-level-study", "--group", "Sp,4", "--conductors", "1e4,1e6,1e8"]);
    let v = validate_against("oneLevelStudy", &out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn rmt_density_matches_schema_and_is_seed_deterministic() {
    let args = ["rmt-density", "--ensemble", "usp", "--n", "8", "--samples", "150", "--delta", "0.5", "--seed", "11"];
    let out1 = run_ok(&args);
    let v1 = validate_against("rmtDensity", &out1);
    let out2 = run_ok(&args);
    let v2: Value = serde_json::from_str(&out2).unwrap();
    assert_eq!(v1["estimate"], v2["estimate"]);
    assert_eq!(v1["stderr"], v2["stderr"]);
    assert!((v1["limit"].as_f64().unwrap() - 0.75).abs() < 1e-12);
}

#[test]
fn csv_outputs_have_headers_and_manifest() {
    let out = run_ok(&["plancherel-moments", "--dual", "C,1", "--q", "4", "--csv"]);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "q,nu,beta_exact,beta_numeric,abs_err");
    assert!(out.lines().last().unwrap().starts_with("# manifest: "));

    let out = run_ok(&[
        "rmt-histogram",
        "--ensemble",
        "so",
        "--n",
        "8",
        "--samples",
        "120",
        "--bins",
        "10",
        "--xmax",
        "4",
        "--seed",
        "3",
    ]);
    assert_eq!(out.lines().next().unwrap(), "bin_center,empirical_density,limit_density");
    assert_eq!(out.lines().count(), 12); // header + 10 bins + manifest
}

#[test]
fn manifest_replay_is_bit_identical_for_exact_ops() {
    let strip_wall_time = |s: &str| -> String {
        let mut v: Value = serde_json::from_str(s).unwrap();
        if let Some(m) = v.get_mut("manifest") {
            m.as_object_mut().unwrap().remove("wall_time_ms");
        }
        v.to_string()
    };
    let a = run_ok(&["phi", "--group", "Sp,4", "--nu", "2"]);
    let b = run_ok(&["phi", "--group", "Sp,4", "--nu", "2"]);
    assert_eq!(strip_wall_time(&a), strip_wall_time(&b));
}

#[test]
fn precondition_and_usage_errors_exit_2() {
    let (code, stderr) = run_err(&["no-such-subcommand"]);
    assert_eq!(code, 2, "unknown subcommand: {stderr}");
    let (code, _) = run_err(&["fs-indicator", "--dual", "E,8"]);
    assert_eq!(code, 2);
    let (code, stderr) = run_err(&["fs-indicator", "--dual", "B,9"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("rank out of supported range"), "stderr: {stderr}");
    let (code, _) = run_err(&["rmt-density", "--ensemble", "usp", "--delta", "1.5", "--samples", "150"]);
    assert_eq!(code, 2);
    let (code, _) = run_err(&["one-level", "--group", "Sp,4", "--conductor", "10"]);
    assert_eq!(code, 2);
    let (code, _) = run_err(&["satake", "--dual", "B,2", "--lambda", "0,1"]);
    assert_eq!(code, 2, "non-dominant weight");
}

#[test]
fn selftest_quick_exits_zero() {
    let out = bin().args(["selftest", "--quick"]).output().expect("spawn");
    assert!(out.status.success(), "selftest failed: {}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("[PASS]"));
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn threads_flag_does_not_change_results() {
    let a = run_ok(&["--threads", "1", "sato-tate-moments", "--dual", "B,2", "--nu-max", "2"]);
    let b = run_ok(&["--threads", "4", "sato-tate-moments", "--dual", "B,2", "--nu-max", "2"]);
    let strip = |s: &str| -> String {
        let mut v: Value = serde_json::from_str(s).unwrap();
        v.as_object_mut().unwrap().remove("manifest");
        v.to_string()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("lowlying-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fs.json");
    run_ok(&["--out", path.to_str().unwrap(), "fs-indicator", "--dual", "D,3"]);
    let text = std::fs::read_to_string(&path).unwrap();
    let v = validate_against("fsIndicator", &text);
    assert_eq!(v["s"], 1);
    std::fs::remove_dir_all(&dir).ok();
}
