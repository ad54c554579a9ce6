use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn vext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vext")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const E15_EXTREMAL: &str = r#"{
  "schema_version": 1,
  "property": "extremal",
  "sets": [
    {"type": "PolynomialRegion", "dim": 2, "poly": {"terms": [{"coef": 1.0, "exps": [1, 1]}]},
     "relation": ">=", "value": 1.0, "side": [{"a": [-1.0, 0.0], "b": 0.0, "strict": true}]},
    {"type": "Halfspace", "a": [0.0, 1.0], "b": 0.0}
  ],
  "sequence": {"kind": "ClosedForm", "maps": [["k", "1/k"], ["k", "0"]]},
  "radius": {"Finite": 1.0}
}"#;

#[test]
fn list_examples_text_and_json() {
    let o = vext(&["list-examples"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.contains("E4.5"));

    let o = vext(&["list-examples", "--json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 10);
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(code(&vext(&["list-examples", "--bogus"])), 3);
    assert_eq!(code(&vext(&["run-example", "E9"])), 3);
    assert_eq!(code(&vext(&[])), 3);
    assert_eq!(code(&vext(&["--help"])), 0);
}

#[test]
fn check_reports_outcome_and_exit_code() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "e15.json", E15_EXTREMAL);
    let o = vext(&["--json", "check", &cfg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["outcome"], "Certified");
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["command"], "check");

    let interior = r#"{"schema_version": 1, "property": "approx_stationary",
      "sets": [{"type": "Halfspace", "a": [1.0, 0.0], "b": 0.0}, {"type": "Halfspace", "a": [0.0, 1.0], "b": 0.0}],
      "sequence": {"kind": "ClosedForm", "maps": [["-1", "-1"]], "single": true}}"#;
    let cfg = write(dir.path(), "interior.json", interior);
    assert_eq!(code(&vext(&["check", &cfg])), 1);
}

#[test]
fn schema_errors_name_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"schema_version": 1, "property": "extremal", "sets": []}"#);
    let o = vext(&["check", &cfg]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sequence"));

    let cfg = write(dir.path(), "extra.json", "{\n \"schema_version\": 1,\n \"property\": \"extremal\",\n \"colour\": 1\n}");
    let o = vext(&["check", &cfg]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
}

#[test]
fn separation_round_trip_and_tampering() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "sep.json", r#"{"schema_version": 1, "example": "E1.5", "eps": [0.01]}"#);
    let cert = dir.path().join("cert.json");
    let cert_s = cert.to_str().unwrap();
    assert_eq!(code(&vext(&["separation", &cfg, "--mode", "search", "--cert", cert_s])), 0);
    assert_eq!(code(&vext(&["separation", &cfg, "--mode", "verify", "--cert", cert_s])), 0);

    let mut file: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    file["certificates"][0]["duals"][0] = serde_json::json!([1.0, 1.0]);
    std::fs::write(&cert, file.to_string()).unwrap();
    let o = vext(&["--json", "separation", &cfg, "--mode", "verify", "--cert", cert_s]);
    assert_eq!(code(&o), 1);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["outcome"], "Falsified");
}

#[test]
fn run_example_writes_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("e44.csv");
    let o = vext(&["--csv", csv.to_str().unwrap(), "run-example", "E4.4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let body = std::fs::read_to_string(&csv).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("k,rho,local_inf,expected"));
    assert_eq!(lines.count(), 6);
}

#[test]
fn plot_svg_and_dimension_check() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("e15.svg");
    assert_eq!(code(&vext(&["plot", "E1.5", "--out", out.to_str().unwrap()])), 0);
    let svg = std::fs::read_to_string(&out).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));

    let cube = r#"{"schema_version": 1, "property": "extremal",
      "sets": [{"type": "Ball", "center": [0.0, 0.0, 0.0], "radius": 1.0}, {"type": "Halfspace", "a": [0.0, 0.0, 1.0], "b": -1.0}],
      "sequence": {"kind": "ClosedForm", "maps": [["0", "0", "-1"], ["0", "0", "-1"]]}}"#;
    let cfg = write(dir.path(), "cube.json", cube);
    let o = vext(&["plot", &cfg, "--out", dir.path().join("c.svg").to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}
