use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tn-neutral"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn residual<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["residuals"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == name)
        .unwrap_or_else(|| panic!("no residual {name}"))
}

#[test]
fn curvature_on_sphere_is_scalar_flat() {
    let out = tn(&["curvature", "--manifold", "sphere2", "--samples", "16"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = json(&out);
    assert_eq!(r["command"], "curvature");
    assert_eq!(r["config"]["samples"], 16);
    let s = residual(&r, "scalar_g");
    assert!(s["value"].as_f64().unwrap() <= 1e-6);
    assert_eq!(s["pass"], true);
    assert!(r["artifacts"].as_array().unwrap().is_empty());
}

#[test]
fn degenerate_hessian_exits_with_location() {
    let out = tn(&["lagrangian", "--n", "2", "--u", "x1^4", "--samples", "4"]);
    assert_eq!(code(&out), 3);
    let err = stderr(&out);
    assert!(err.contains("degenerate Hessian at ["), "{err}");
}

#[test]
fn identical_runs_write_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json").display().to_string();
    let args = [
        "curvature",
        "--manifold",
        "hyperbolic2",
        "--samples",
        "8",
        "--seed",
        "7",
        "--out",
        &path,
    ];
    let mut runs = Vec::new();
    for _ in 0..2 {
        let out = tn(&args);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(out.stdout.is_empty());
        runs.push(std::fs::read(&path).unwrap());
    }
    assert!(!runs[0].is_empty());
    assert_eq!(runs[0], runs[1]);
    // Thread count does not change the bytes.
    let out = Command::new(env!("CARGO_BIN_EXE_tn-neutral"))
        .args(args)
        .env("TN_NEUTRAL_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&path).unwrap(), runs[0]);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["curvature", "--samples", "0"],
        vec!["curvature", "--manifold", "klein-bottle"],
        vec!["curvature", "--tol-oracle_gap", "-1"],
        vec!["lagrangian", "--n", "2", "--u", "x1 +* x2"],
        vec!["linespace", "--p", "0,0,1.1", "--V", "1,0,0"],
        vec!["source", "--n", "2"],
        vec!["nonsense"],
    ] {
        let out = tn(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn tolerance_override_changes_the_verdict() {
    let out = tn(&[
        "curvature",
        "--manifold",
        "sphere2",
        "--samples",
        "4",
        "--tol-oracle_gap",
        "1e-30",
    ]);
    assert_eq!(code(&out), 1);
    let r = json(&out);
    let close = |v: &Value| (v.as_f64().unwrap() / 1e-30 - 1.0).abs() < 1e-12;
    assert!(close(&residual(&r, "oracle_gap")["tolerance"]));
    assert!(close(&r["config"]["tolerances"]["oracle_gap"]));
    assert!(stderr(&out).contains("out of tolerance: oracle_gap"));
}

#[test]
fn csv_report() {
    let out = tn(&[
        "lagrangian",
        "--n",
        "2",
        "--u",
        "x1^2 + x2^2",
        "--samples",
        "4",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,value,tolerance,bound,pass,informational"));
    assert!(
        text.contains("\ntotally_geodesic_residual,0e0,1e-10,at_most,true,true\n"),
        "{text}"
    );
}

#[test]
fn expectations_gate_the_exit_status() {
    let cubic = [
        "lagrangian",
        "--n",
        "2",
        "--u",
        "x1^2 + x2^2 + 0.3*x1^3",
        "--samples",
        "8",
    ];
    assert_eq!(code(&tn(&cubic)), 0);
    let mut strict = cubic.to_vec();
    strict.extend(["--expect", "totally-geodesic"]);
    assert_eq!(code(&tn(&strict)), 1);
}

#[test]
fn manifold_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("poincare.json");
    let def = r#"{"name": "poincare", "n": 2, "domain": [[-1, 1], [0.5, 3]],
                  "metric": [["1/y^2", "0"], ["0", "1/y^2"]], "variables": ["x", "y"]}"#;
    std::fs::write(&file, def).unwrap();
    let out = tn(&["curvature", "--manifold", file.to_str().unwrap(), "--samples", "6"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(json(&out)["notes"][0].as_str().unwrap().contains("poincare"));

    std::fs::write(&file, r#"{"name": "bad", "n": 2}"#).unwrap();
    assert_eq!(code(&tn(&["curvature", "--manifold", file.to_str().unwrap()])), 2);
}

#[test]
fn geodesic_paths_are_written_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let paths = dir.path().join("paths");
    let out = tn(&[
        "geodesic",
        "--manifold",
        "sphere2",
        "--samples",
        "2",
        "--steps",
        "200",
        "--paths-dir",
        paths.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = json(&out);
    let artifacts = r["artifacts"].as_array().unwrap();
    assert_eq!(artifacts.len(), 2);
    let first = Path::new(artifacts[0].as_str().unwrap());
    let text = std::fs::read_to_string(first).unwrap();
    assert!(text.starts_with("t,x1,x2,v1,v2\n"));
    assert_eq!(text.lines().count(), 202);
}

#[test]
fn linespace_single_point() {
    let out = tn(&["linespace", "--p", "0,0.6,0.8", "--V", "1.5,0,0"]);
    let r = json(&out);
    assert!(residual(&r, "isometry")["value"].as_f64().unwrap() < 1e-10);
    assert!(residual(&r, "kahler_isometry")["value"].as_f64().unwrap() < 1e-10);
    // The embedding has mean curvature (0, -4p), so the minimality check fails.
    assert_eq!(residual(&r, "mean_curvature")["pass"], false);
    assert_eq!(code(&out), 1);
}

#[test]
fn source_with_custom_intensity() {
    let out = tn(&["source", "--n", "2", "--H", "R + 0.2*R^2", "--samples", "8"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = json(&out);
    assert!(residual(&r, "det_formula")["value"].as_f64().unwrap() < 1e-8);
    assert_eq!(residual(&r, "minimal_residual")["informational"], true);
}

#[test]
fn verify_all_subset() {
    let out = tn(&["verify-all", "--criteria", "1,12,13"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = json(&out);
    let names: Vec<&str> = r["residuals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"c01/scalar_flatness/sphere2"));
    assert!(names.contains(&"c13/algebra"));
    assert!(stderr(&out).contains("PASS criterion 13"));
}

#[test]
fn verify_all_reports_failing_criterion() {
    let out = tn(&["verify-all", "--criteria", "8"]);
    assert_eq!(code(&out), 1);
    let r = json(&out);
    assert_eq!(residual(&r, "c08/hminimal_residual")["pass"], false);
}

#[test]
fn thread_cap() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_tn-neutral"))
            .args(["curvature", "--manifold", "euclidean2", "--samples", "4"])
            .env("TN_NEUTRAL_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1")), 0);
    assert_eq!(code(&run("0")), 2);
    assert_eq!(code(&run("many")), 2);
}
