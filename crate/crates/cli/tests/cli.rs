use std::path::Path;
use std::process::{Command, Output};

fn barylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_barylab")).args(args).env("BARYLAB_THREADS", "2").output().expect("binary runs")
}

fn out_dir(dir: &tempfile::TempDir) -> &str {
    dir.path().to_str().unwrap()
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    lines.next().unwrap();
    lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

fn header(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().nth(1).unwrap().split(',').map(String::from).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn identity_at_the_origin() {
    let dir = tempfile::tempdir().unwrap();
    let out = barylab(&["extend", "--map", "power:1", "--out-dir", out_dir(&dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&dir.path().join("extend.csv"));
    assert_eq!(table.len(), 1);
    let row = &table[0];
    assert!(row[..4].iter().all(|x| x.abs() < 1e-12));
    assert!((row[4] - 1.0).abs() < 1e-9);
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["map_spec"], "power:1");
    assert!(manifest["outputs"].as_array().unwrap().iter().any(|o| o == "extend.csv"));
}

#[test]
fn malformed_spec_names_the_token() {
    let dir = tempfile::tempdir().unwrap();
    let out = barylab(&["extend", "--map", "power:x", "--out-dir", out_dir(&dir)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`x`"));
}

#[test]
fn radial_points_with_refinement() {
    let dir = tempfile::tempdir().unwrap();
    let out = barylab(&["extend", "--map", "power:2", "--radial", "10", "--N", "512", "--out-dir", out_dir(&dir)]);
    assert_eq!(out.status.code(), Some(0));
    let path = dir.path().join("extend.csv");
    assert!(header(&path).contains(&"refinement".to_string()));
    let table = rows(&path);
    assert_eq!(table.len(), 10);
    assert!(table.iter().all(|r| r[5].is_finite() && r[6] == 0.0));
}

#[test]
fn failed_points_are_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let out = barylab(&["extend", "--map", "power:2", "--point", "0.99999999999,0", "--point", "0.5,0", "--out-dir", out_dir(&dir)]);
    assert_eq!(out.status.code(), Some(2));
    let table = rows(&dir.path().join("extend.csv"));
    assert_eq!(table[0][6], 1.0);
    assert_eq!(table[1][6], 0.0);
}

#[test]
fn dirichlet_radius_out_of_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = barylab(&["dirichlet", "--map", "power:2", "--R", "20", "--out-dir", out_dir(&dir)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dirichlet_isometry_with_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = barylab(&["dirichlet", "--map", "mobius:0.3,0.2", "--R", "2", "--h", "0.1", "--svg", "--out-dir", out_dir(&dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&dir.path().join("dirichlet_summary.json"));
    assert!(summary["rho_r"].as_f64().unwrap() <= 5e-3);
    assert_eq!(summary["unconverged"], false);
    assert!(std::fs::read_to_string(dir.path().join("dirichlet_energy.svg")).unwrap().starts_with("<svg"));
    assert!(dir.path().join("dirichlet_mesh.csv").exists());
}

#[test]
fn dirichlet_covering_energy_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = barylab(&["dirichlet", "--map", "qs:pw2;deg=2", "--R", "2.5", "--h", "0.15", "--out-dir", out_dir(&dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&dir.path().join("dirichlet_summary.json"));
    assert_eq!(summary["energy_monotone"], true);
    let energies: Vec<f64> = summary["report"]["energies"].as_array().unwrap().iter().map(|e| e.as_f64().unwrap()).collect();
    assert!(energies.len() > 1);
    assert!(energies.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
}

#[test]
fn unconverged_runs_keep_their_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = barylab(&["dirichlet", "--map", "power:2", "--R", "2", "--h", "0.2", "--max-sweeps", "2", "--out-dir", out_dir(&dir)]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&dir.path().join("dirichlet_summary.json"))["unconverged"], true);
    assert_eq!(rows(&dir.path().join("dirichlet_energy.csv")).len(), 3);
}

#[test]
fn gravity_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = barylab(&["verify", "--suite", "gravity", "--out-dir", out_dir(&dir)]);
    assert_eq!(out.status.code(), Some(0));
    let summary = json(&dir.path().join("gravity_summary.json"));
    assert_eq!(summary["scalars"]["violations"], 0.0);
    assert_eq!(summary["criteria"]["3"], true);
}

#[test]
fn modulus_needs_the_two_sphere() {
    let out = barylab(&["verify", "--suite", "modulus", "--n", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n=2 required"));
}

#[test]
fn unknown_suite_lists_the_valid_names() {
    let out = barylab(&["verify", "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["lipschitz", "radial-qi", "annulus-image", "trig"] {
        assert!(err.contains(name));
    }
}

#[test]
fn same_seed_same_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = barylab(&["verify", "--suite", "radial-qi", "--seed", "7", "--samples", "40", "--N", "512", "--out-dir", out_dir(dir)]);
        assert_eq!(out.status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("radial_qi_directions.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"seed": 3, "samples": 50, "N": 256}"#).unwrap();
    let out = barylab(&["verify", "--suite", "trig", "--config", config.to_str().unwrap(), "--seed", "5", "--out-dir", out_dir(&dir)]);
    assert_eq!(out.status.code(), Some(0));
    let summary = json(&dir.path().join("trig_summary.json"));
    assert_eq!(summary["config"]["seed"], 5);
    assert_eq!(summary["config"]["samples"], 50);
    assert_eq!(summary["config"]["quadrature_N"], 256);
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"sedd": 3}"#).unwrap();
    let out = barylab(&["verify", "--suite", "trig", "--config", config.to_str().unwrap(), "--out-dir", out_dir(&dir)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_barylab")).args(["verify", "--suite", "trig"]).env("BARYLAB_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
