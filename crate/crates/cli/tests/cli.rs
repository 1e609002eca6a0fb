use std::path::{Path, PathBuf};
use std::process::Command;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn dpp(args: &[&str], out: &Path) -> (i32, serde_json::Value) {
    let status = Command::new(env!("CARGO_BIN_EXE_dpp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    let report = std::fs::read_to_string(out.join("report.json")).unwrap();
    (status.status.code().unwrap(), serde_json::from_str(&report).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn decay_text() -> String {
    std::fs::read_to_string(scenario("decay_uniqueness.json")).unwrap()
}

#[test]
fn decay_uniqueness_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let (code, r) = dpp(&["run", scenario("decay_uniqueness.json").to_str().unwrap()], &out);
    assert_eq!(code, 0);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["scenario"]["time"]["scheme"], "crank_nicolson");
    let csv = std::fs::read_to_string(out.join("series/uniqueness_pair0.csv")).unwrap();
    assert!(csv.starts_with("t,E,E_dot,E_ddot,log_margin,exp_margin\n"));
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().count(), 42);
}

#[test]
fn unknown_key_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.json", &decay_text().replace("\"viscosity\"", "\"viscocity\""));
    let (code, r) = dpp(&["run", p.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(code, 2);
    assert_eq!(r["kind"], "input");
    let msg = r["message"].as_str().unwrap();
    assert!(msg.contains("viscocity") && msg.contains("material"), "{msg}");
}

#[test]
fn invalid_porosity_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.json", &decay_text().replace("\"porosity\": 0.4", "\"porosity\": 1.5"));
    let (code, r) = dpp(&["run", p.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(code, 2);
    assert!(r["details"][0].as_str().unwrap().starts_with("porosity out of (0,1)"));
}

#[test]
fn missing_gauge_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = dpp(&["run", scenario("closed_no_exchange.json").to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(code, 3);
    assert!(r["message"].as_str().unwrap().contains("singular pressure system"));

    let text = std::fs::read_to_string(scenario("closed_no_exchange.json")).unwrap();
    let pinned = text.replacen('{', "{\"solver\": {\"pin_pressure\": true},", 1);
    let p = write(dir.path(), "pinned.json", &pinned);
    let (code, _) = dpp(&["run", p.to_str().unwrap()], &dir.path().join("out2"));
    assert_eq!(code, 0);
}

#[test]
fn convergence_needs_three_levels() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("decay_uniqueness.json");
    let (code, r) = dpp(&["run", s.to_str().unwrap(), "--suite", "convergence", "--levels", "2"], &dir.path().join("out"));
    assert_eq!(code, 2);
    assert!(r["message"].as_str().unwrap().contains("at least 3 levels"));
}

#[test]
fn backward_euler_decay_is_first_order_in_time() {
    let dir = tempfile::tempdir().unwrap();
    let text = decay_text()
        .replace("\"steps\": 40}", "\"steps\": 10, \"scheme\": \"backward_euler\"}")
        .replace("\"cells\": [64]", "\"cells\": [8]")
        .replacen('{', "{\"convergence\": {\"refine\": \"time\"},", 1);
    let p = write(dir.path(), "be.json", &text);
    let (code, r) = dpp(&["run", p.to_str().unwrap(), "--suite", "convergence", "--levels", "4"], &dir.path().join("out"));
    assert_eq!(code, 0, "{r}");
    let q = &r["suites"]["convergence"]["quantities"][0];
    assert_eq!(q["name"], "velocity_error");
    assert!((q["order"].as_f64().unwrap() - 1.0).abs() <= 0.2);
}

#[test]
fn identical_reciprocity_loads_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("decay_uniqueness.json");
    let out = dir.path().join("out");
    let (code, r) = dpp(&["run", s.to_str().unwrap(), "--suite", "reciprocity"], &out);
    assert_eq!(code, 0);
    assert_eq!(r["suites"]["reciprocity"]["max_abs_residual"].as_f64(), Some(0.0));
    let csv = std::fs::read_to_string(out.join("series/reciprocity.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some("0.0000000000000000e0")));
}

#[test]
fn literal_boundary_form_fails_the_variational_suite() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(scenario("smooth_all.json")).unwrap()).unwrap();
    v["variational"] = serde_json::json!({"form": "literal", "directions": 4});
    let p = write(dir.path(), "lit.json", &v.to_string());
    let (code, r) = dpp(&["run", p.to_str().unwrap(), "--suite", "variational"], &dir.path().join("out"));
    assert_eq!(code, 1);
    assert_eq!(r["suites"]["variational"]["pass"], false);
}

#[test]
fn vtk_snapshots_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let (code, _) = dpp(&["run", scenario("smooth_all.json").to_str().unwrap(), "--suite", "uniqueness"], &out);
    assert_eq!(code, 0);
    let vtk = std::fs::read_to_string(out.join("fields/step00040.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0\n"));
    assert!(vtk.contains("DATASET STRUCTURED_POINTS"));
    assert!(vtk.contains("VECTORS u2 double"));
}
