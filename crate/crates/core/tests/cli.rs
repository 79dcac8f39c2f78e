use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_defectscope"))
        .args(args)
        .env("DEFECTSCOPE_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn report(dir: &Path, cmd: &str, name: &str, tag: &str) -> (String, Value) {
    let out = dir.join(format!("{name}-{cmd}-{tag}.json"));
    let o = run(&[cmd, "--spec", fixture(name).to_str().unwrap(), "--json", out.to_str().unwrap()]);
    assert!(o.status.success(), "{cmd} {name}: {}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let v = serde_json::from_str(&text).unwrap();
    (text, v)
}

#[test]
fn predict_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, v) = report(dir.path(), "predict", "hexagon", "a");
    let (b, _) = report(dir.path(), "predict", "hexagon", "b");
    assert_eq!(a, b);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "predict");
    let text = v.to_string();
    assert!(text.contains("\"1\"") || text.contains(":1"), "{text}");
}

#[test]
fn analyze_and_check_reports() {
    let dir = TempDir::new().unwrap();
    let (a, v) = report(dir.path(), "analyze", "sphere_cap", "a");
    let (b, _) = report(dir.path(), "analyze", "sphere_cap", "b");
    assert_eq!(a, b);
    let residual = v["gauss_bonnet"]["residual"].as_f64().expect("residual present");
    assert!(residual.abs() < 1e-6, "{residual}");

    let (a, v) = report(dir.path(), "check", "disk_radial", "a");
    let (b, _) = report(dir.path(), "check", "disk_radial", "b");
    assert_eq!(a, b);
    assert_eq!(v["report"]["residual_snapped"], "0", "{v}");
}

#[test]
fn rates_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("rates.csv");
    let o = run(&["rates", "--spec", fixture("square").to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 5, "{text}");
}

#[test]
fn csv_without_table_is_rejected() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("x.csv");
    let o = run(&["analyze", "--spec", fixture("square").to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_flags_exit_two() {
    for args in [
        vec!["predict", "--bound", "x"],
        vec!["predict", "--q-exponent", "3"],
        vec!["analyze", "--quadrature", "Q9"],
        vec!["check", "--mode", "tensor"],
    ] {
        let mut full = args.clone();
        let spec = fixture("square");
        full.extend(["--spec", spec.to_str().unwrap()]);
        assert_eq!(run(&full).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(run(&["analyze", "--spec", "/nonexistent/spec.json"]).status.code(), Some(2));
}

fn base() -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture("square")).unwrap()).unwrap()
}

fn with(path: &[&str], value: Value) -> Value {
    let mut v = base();
    let mut cur = &mut v;
    for key in &path[..path.len() - 1] {
        cur = &mut cur[*key];
    }
    cur[path[path.len() - 1]] = value;
    v
}

fn without(key: &str) -> Value {
    let mut v = base();
    v.as_object_mut().unwrap().remove(key);
    v
}

#[test]
fn malformed_specs_are_located() {
    let cases: Vec<(&str, String, &str)> = vec![
        ("not json", "{ \"schema\": 1,".into(), "$"),
        ("top level array", "[]".into(), "$"),
        ("schema 2", with(&["schema"], json!(2)).to_string(), "$.schema"),
        ("missing schema", without("schema").to_string(), "schema"),
        ("unknown key", with(&["colour"], json!("red")).to_string(), "colour"),
        ("missing chart", without("chart").to_string(), "chart"),
        ("bad family", with(&["chart", "family"], json!("torus")).to_string(), "$.chart.family"),
        ("sphere radius", json!({"schema":1,"name":"s","chart":{"family":"sphere","radius":-1},
            "domain":{"type":"rectangle","min":[0.5,0],"max":[1,1]},"mode":"vector"}).to_string(), "$.chart.radius"),
        ("cone angle", with(&["chart"], json!({"family":"cone","half_angle":2})).to_string(), "$.chart.half_angle"),
        ("bad domain type", with(&["domain", "type"], json!("blob")).to_string(), "$.domain.type"),
        ("short point", with(&["domain", "min"], json!([0])).to_string(), "$.domain.min"),
        ("inverted rectangle", with(&["domain", "max"], json!([-2, 1])).to_string(), "$.domain"),
        ("polygon too small", with(&["domain"], json!({"type":"polygon","vertices":[[0,0],[1,0]]})).to_string(), "$.domain: need at least 3"),
        ("bad mode", with(&["mode"], json!("tensor")).to_string(), "$.mode"),
        ("field syntax", with(&["field", "a1"], json!("1 +")).to_string(), "$.field.a1"),
        ("field identifier", with(&["field", "a2"], json!("w3")).to_string(), "$.field.a2"),
        ("quadrature", with(&["quadrature"], json!("Q7")).to_string(), "$.quadrature"),
        ("predictor bound", with(&["predictor"], json!({"bound":"1/0"})).to_string(), "$.predictor.bound"),
        ("q exponent", with(&["predictor"], json!({"q_exponent":3})).to_string(), "$.predictor.q_exponent"),
        ("boundary component count", with(&["topology"], json!({"genus":0,"boundary_components":2})).to_string(), "$.topology"),
        ("energy without site", with(&["energy"], json!({"radius":0.5})).to_string(), "$.energy.site"),
        ("zero outside domain", with(&["field", "zeros"], json!([{"at":[5,5]}])).to_string(), "$.field.zeros[0].at"),
    ];
    assert!(cases.len() >= 20);
    let dir = TempDir::new().unwrap();
    for (i, (label, text, location)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("case{i}.json"));
        std::fs::write(&path, text).unwrap();
        let o = run(&["analyze", "--spec", path.to_str().unwrap()]);
        let stderr = String::from_utf8_lossy(&o.stderr);
        assert_eq!(o.status.code(), Some(2), "{label}: {stderr}");
        assert!(stderr.contains(location), "{label}: expected `{location}` in {stderr}");
    }
}
