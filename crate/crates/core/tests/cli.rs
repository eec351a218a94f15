use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const MANIFEST: &str = r#"
t_grid = [0.0, 1.0]
k_grid = [2, 3]
samples = 4
seed = 17
checks = ["strong_convexity", "curvature_bounds", "isometry", "distance"]

[[factors]]
kind = "poincare_disk"
count = 2
"#;

fn finslerlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finslerlab"))
        .args(args)
        .output()
        .unwrap()
}

fn write_manifest(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn without_wall_time(out: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(out).unwrap();
    v.as_object_mut().unwrap().remove("wall_time");
    v
}

#[test]
fn passing_manifest_exits_zero_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), MANIFEST);
    let a = finslerlab(&["check", &m]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = finslerlab(&["check", &m]);
    assert_eq!(without_wall_time(&a.stdout), without_wall_time(&b.stdout));
    let report = without_wall_time(&a.stdout);
    assert_eq!(report["summary"]["passed"], 16);
    assert_eq!(report["summary"]["failed"], 0);
    assert_eq!(report["checks"].as_array().unwrap().len(), 16);
}

#[test]
fn seed_override_changes_the_samples() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), MANIFEST);
    let a = without_wall_time(&finslerlab(&["check", &m]).stdout);
    let b = without_wall_time(&finslerlab(&["check", &m, "--seed", "18"]).stdout);
    assert_eq!(b["manifest"]["seed"], 18);
    assert_ne!(a["checks"], b["checks"]);
}

#[test]
fn tight_tolerance_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), MANIFEST);
    let out = finslerlab(&["check", &m, "--tol", "strong_convexity=1e-300"]);
    assert_eq!(out.status.code(), Some(1));
    let report = without_wall_time(&out.stdout);
    assert!(report["summary"]["failed"].as_u64().unwrap() > 0);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_manifest(dir.path(), &MANIFEST.replace("\"isometry\"", "\"no_such_check\""));
    let out = finslerlab(&["check", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("checks[2]"));
    assert_eq!(finslerlab(&["check", "/nonexistent/run.toml"]).status.code(), Some(2));
    assert_eq!(
        finslerlab(&["distance", "--z1", "0,0", "--z2", "1.5,0"]).status.code(),
        Some(2)
    );
    assert_eq!(finslerlab(&["check", &bad, "--tol", "oops"]).status.code(), Some(2));
}

#[test]
fn csv_report_has_one_row_per_check() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), MANIFEST);
    let out_path = dir.path().join("report.csv");
    let out = finslerlab(&["check", &m, "--format", "csv", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mut r = csv::Reader::from_path(&out_path).unwrap();
    let headers = r.headers().unwrap().clone();
    assert_eq!(&headers[0], "check");
    assert_eq!(r.records().count(), 16);
}

#[test]
fn distance_subcommand_prints_the_closed_form() {
    let out = finslerlab(&[
        "distance",
        "--z1",
        "0,0",
        "--z2",
        &format!("{},0", 1f64.tanh()),
        "--t",
        "5",
        "--k",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["method"], "closed_form");
}

#[test]
fn curvature_sweep_stays_inside_the_bounds() {
    let out = finslerlab(&[
        "curvature",
        "--t-min",
        "0",
        "--t-max",
        "4",
        "--steps",
        "5",
        "--k",
        "2",
        "--direction",
        "1,1",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let (k, lo, hi): (f64, f64, f64) = (
            row[2].parse().unwrap(),
            row[3].parse().unwrap(),
            row[4].parse().unwrap(),
        );
        assert!(k >= lo - 1e-9 && k <= hi + 1e-9);
    }
}

#[test]
fn geodesic_subcommand_follows_the_closed_form() {
    let out = finslerlab(&[
        "geodesic",
        "--from",
        "0,0",
        "--velocity",
        "0.5,0",
        "--s-max",
        "1",
        "--steps",
        "16",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 17);
    let last = &samples[16]["x"];
    assert!((last[0].as_f64().unwrap() - 0.5f64.tanh()).abs() < 1e-8);
}
