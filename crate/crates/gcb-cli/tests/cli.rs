use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::Command;
use tempfile::TempDir;

fn gcb(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gcb")).args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let v = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v, stdout)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path
}

fn built(dir: &TempDir, name: &str, parts: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut args = vec!["build"];
    args.extend_from_slice(parts);
    args.extend_from_slice(&["--write", p(&path)]);
    assert_eq!(gcb(&args).0, 0);
    path
}

fn value(v: &Value, key: &str) -> f64 {
    v["results"][key].as_f64().unwrap()
}

#[test]
fn validate_pair2() {
    let dir = TempDir::new().unwrap();
    let f = built(&dir, "pair2.json", &["pair:2"]);
    let (code, v, _) = gcb(&["validate", "--groupoid", p(&f)]);
    assert_eq!(code, 0);
    assert_eq!(v["ok"], true);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["inputs"]["groupoid"]["round_trip"], true);
    assert_eq!(v["inputs"]["groupoid"]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(v["results"]["elements"], 4);
}

#[test]
fn lambda_cb_z2() {
    let dir = TempDir::new().unwrap();
    let f = built(&dir, "z2.json", &["z2"]);
    let (code, v, _) = gcb(&["lambda-cb", "--groupoid", p(&f)]);
    assert_eq!(code, 0);
    assert!((value(&v, "value") - 1.0).abs() <= 1e-6);
}

#[test]
fn schur_norm_had2() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "had2.json", &json!([[1, 1], [1, -1]]));
    let (code, v, _) = gcb(&["schur-norm", "--matrix", p(&f)]);
    assert_eq!(code, 0);
    // Test matrix X = H: ‖H∘H‖/‖H‖ = 2/√2. Factorization H = I·H: rows 1, columns √2.
    let oracle = 2f64.sqrt();
    assert!((value(&v, "value") - oracle).abs() <= 1e-6);
    assert!(value(&v, "lower") <= oracle + 1e-9);
    assert!(v["deviations"]["residual"]["value"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let f = built(&dir, "pair3.json", &["pair:3"]);
    let phi = write(&dir, "phi.json", &json!({"(0,0)": 1, "(1,1)": 1, "(2,2)": 1}));
    let a = gcb(&["m0a", "--groupoid", p(&f), "--phi", p(&phi), "--seed", "7"]);
    let b = gcb(&["m0a", "--groupoid", p(&f), "--phi", p(&phi), "--seed", "7"]);
    assert_eq!(a.0, 0);
    assert_eq!(a.2, b.2);
    assert!((value(&a.1, "value") - 1.0).abs() <= 1e-6);
    assert!(a.1.get("wall_time_ms").is_none());
    let t = gcb(&["m0a", "--groupoid", p(&f), "--phi", p(&phi), "--timing"]);
    assert!(t.1["wall_time_ms"].is_number());
}

#[test]
fn out_flag_writes_the_report() {
    let dir = TempDir::new().unwrap();
    let f = built(&dir, "z3.json", &["cyclic:3"]);
    let out = dir.path().join("r.json");
    let (code, _, stdout) = gcb(&["inner-exact", "--groupoid", p(&f), "--out", p(&out)]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["command"], "inner-exact");
    assert_eq!(v["ok"], true);
}

#[test]
fn suite_over_the_zoo() {
    let (code, v, _) = gcb(&["suite"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["failed"], 0);
    let checks = v["results"]["checks"].as_array().unwrap();
    let modules: std::collections::BTreeSet<&str> = checks.iter().map(|c| c["module"].as_str().unwrap()).collect();
    assert!(modules.len() >= 10, "{modules:?}");
}

#[test]
fn suite_filter() {
    let (code, v, _) = gcb(&["suite", "--filter", "fell"]);
    assert_eq!(code, 0);
    let checks = v["results"]["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["module"] == "fell"));
    assert_eq!(gcb(&["suite", "--filter", "nonesuch"]).0, 1);
}

#[test]
fn suite_rejects_a_corrupted_groupoid() {
    let dir = TempDir::new().unwrap();
    let f = built(&dir, "pair2.json", &["pair:2"]);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    v["comp"][1][2] = json!("(0,0)");
    let bad = write(&dir, "bad.json", &v);
    let (code, r, _) = gcb(&["suite", p(&bad)]);
    assert_eq!(code, 1);
    assert_eq!(r["ok"], false);
    assert_eq!(r["error"]["kind"], "AxiomViolation");
    let (code, r, _) = gcb(&["validate", "--groupoid", p(&bad)]);
    assert_eq!(code, 1);
    assert_eq!(r["error"]["kind"], "AxiomViolation");
}

#[test]
fn suite_accepts_extra_files() {
    let dir = TempDir::new().unwrap();
    let g = built(&dir, "g.json", &["s3", "pair:2"]);
    let pa = gcb::zoo::partial_actions();
    let a = write(&dir, "pa.json", &serde_json::to_value(pa[0].pa.to_raw()).unwrap());
    let sg = gcb::zoo::semigroups();
    let s = write(&dir, "s.json", &serde_json::to_value(sg[0].s.to_raw()).unwrap());
    let (code, v, _) = gcb(&["suite", p(&g), p(&a), p(&s)]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["inputs"].as_object().unwrap().len(), 3);
}

#[test]
fn partial_action_and_semigroup_commands() {
    let dir = TempDir::new().unwrap();
    for z in gcb::zoo::partial_actions() {
        let a = write(&dir, "pa.json", &serde_json::to_value(z.pa.to_raw()).unwrap());
        let out = dir.path().join("tg.json");
        let (code, v, _) = gcb(&["pa-build", "--action", p(&a), "--write", p(&out)]);
        assert_eq!(code, 0, "{} {v}", z.name);
        assert_eq!(gcb(&["validate", "--groupoid", p(&out)]).0, 0);
        let (code, v, _) = gcb(&["pa-equality", "--action", p(&a)]);
        assert_eq!(code, 0, "{} {v}", z.name);
    }
    for z in gcb::zoo::semigroups() {
        let s = write(&dir, "s.json", &serde_json::to_value(z.s.to_raw()).unwrap());
        let (code, v, _) = gcb(&["isg-validate", "--semigroup", p(&s)]);
        assert_eq!(code, 0, "{} {v}", z.name);
        let out = dir.path().join("u.json");
        let (code, v, _) = gcb(&["universal", "--semigroup", p(&s), "--write", p(&out)]);
        assert_eq!(code, 0, "{} {v}", z.name);
        assert_eq!(gcb(&["validate", "--groupoid", p(&out)]).0, 0, "{}", z.name);
    }
}

#[test]
fn groupoid_commands_on_a_union() {
    let dir = TempDir::new().unwrap();
    let g = built(&dir, "g.json", &["z2", "pair:2", "--mu", "1/2,1/4,1/4"]);
    let (code, v, _) = gcb(&["fell-check", "--groupoid", p(&g)]);
    assert_eq!(code, 0, "{v}");
    let (code, v, _) = gcb(&["fell-check", "--groupoid", p(&g), "--tensor-cap", "2"]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "TooLarge");
    let f = write(&dir, "f.json", &json!({"0.0": 1, "1.(0,1)": [0, 2]}));
    let (code, v, _) = gcb(&["norm", "--groupoid", p(&g), "--f", p(&f)]);
    assert_eq!(code, 0, "{v}");
    let (code, v, _) = gcb(&["posdef", "--groupoid", p(&g), "--phi", p(&f)]);
    assert!(code <= 1, "{v}");
}

#[test]
fn usage_errors() {
    assert_eq!(gcb(&["--bogus"]).0, 64);
    assert_eq!(gcb(&["validate"]).0, 64);
    assert_eq!(gcb(&["--help"]).0, 0);
    let (code, v, _) = gcb(&["validate", "--groupoid", "/nonexistent/g.json"]);
    assert_eq!(code, 1);
    assert_eq!(v["ok"], false);
}
