use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use transpoint::corpus::{corpus_entry, CORPUS_NAMES};
use transpoint_cli::load_config;

fn corpus_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(format!("{name}.toml"))
}

fn run_cli(config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transpoint"))
        .arg("run")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn csv_rows(out: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(out.join("records.csv")).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn corpus_files_match_the_library_corpus() {
    for name in CORPUS_NAMES {
        let cfg = load_config(&corpus_file(name)).unwrap();
        let entry = corpus_entry(name).unwrap();
        assert_eq!(cfg.spec(), entry.spec, "{name}");
        assert_eq!(cfg.mode, entry.mode, "{name}");
    }
}

#[test]
fn sphere_corpus_run_succeeds_with_a_sorted_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&corpus_file("diag-0.3-0.7-eps0.05"), dir.path(), &["--routes", "direct"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_path(dir.path().join("records.csv")).unwrap();
    let header: Vec<_> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["q1", "q2", "q3", "q4", "t", "residual_fixed", "residual_g", "nondegenerate", "route"]
    );
    let rows = csv_rows(dir.path());
    assert!(rows.len() >= 2);
    let ts: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(ts.windows(2).all(|w| w[0] <= w[1]));
    for row in &rows {
        assert_eq!(&row[7], "true");
        assert_eq!(&row[8], "direct");
        assert!(row[5].parse::<f64>().unwrap() <= 1e-8);
        assert!(row[6].parse::<f64>().unwrap() <= 1e-6);
        let q: Vec<f64> = (0..4).map(|j| row[j].parse().unwrap()).collect();
        assert!((q.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs() < 1e-12);
    }
    let rep = report(dir.path());
    assert_eq!(rep["exit_status"], "success");
    assert_eq!(rep["sweep"]["bound"]["outcome"], "met");
    assert_eq!(rep["calibration"]["passed"], true);
    assert_eq!(rep["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn both_routes_agree_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&corpus_file("diag-0.3-0.7-eps0.05"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = report(dir.path());
    assert_eq!(rep["sweep"]["direct_count"], rep["sweep"]["genfun_count"]);
    assert!(csv_rows(dir.path()).iter().all(|r| &r[8] == "both"));
    assert!(rep["timings"]["stages"]["critical_rays"].as_f64().unwrap() > 0.0);
}

#[test]
fn projective_corpus_run_counts_classes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&corpus_file("rp3-sym-eps0.05"), dir.path(), &["--routes", "direct"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = report(dir.path());
    let classes = rep["sweep"]["classes"].as_array().unwrap();
    assert!(classes.len() >= 4);
    assert_eq!(rep["sweep"]["counts"]["projective_count"], classes.len());
    assert_eq!(csv_rows(dir.path()).len(), 2 * classes.len());
}

#[test]
fn constant_hamiltonian_exits_with_bounds_not_asserted() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&corpus_file("constant-0.5"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let rep = report(dir.path());
    assert_eq!(rep["sweep"]["continuum"], true);
    assert_eq!(rep["sweep"]["counts"]["sphere_count"], Value::Null);
    assert_eq!(rep["sweep"]["bound"]["outcome"], "not-asserted");
}

#[test]
fn record_table_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = corpus_file("diag-0.3-0.7-eps0.05");
    let mut tables = Vec::new();
    let mut hashes = Vec::new();
    for _ in 0..2 {
        assert_eq!(run_cli(&cfg, dir.path(), &["--routes", "direct"]).status.code(), Some(0));
        tables.push(std::fs::read(dir.path().join("records.csv")).unwrap());
        hashes.push(report(dir.path())["config_sha256"].clone());
    }
    assert_eq!(tables[0], tables[1]);
    assert_eq!(hashes[0], hashes[1]);
}

#[test]
fn invalid_config_exits_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "schema_version = 1\nn = 2\nmode = \"sphere\"\n[hamiltonian]\nquadratic = [0.3, 0.7]\n[detection]\nrotation_pieces = 2\n",
    )
    .unwrap();
    let out = run_cli(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("detection.rotation_pieces"));
}

#[test]
fn mode_override_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&corpus_file("diag-0.3-0.7-eps0.05"), dir.path(), &["--mode", "projective"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("h(-z) = h(z)"));
}

#[test]
fn coarse_integrator_fails_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("coarse.toml");
    std::fs::write(
        &cfg,
        "schema_version = 1\nn = 2\nmode = \"sphere\"\n[hamiltonian]\nquadratic = [0.3, 0.7]\n[detection.integrator]\nsteps_per_unit = 8\n",
    )
    .unwrap();
    let out = run_cli(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(5));
    let rep = report(&dir.path().join("out"));
    assert_eq!(rep["calibration"]["passed"], false);
    assert_eq!(rep["exit_status"], "calibration-failed");
}

#[test]
fn missing_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&dir.path().join("absent.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.toml"));
}
