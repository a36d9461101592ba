use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dkp-aim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = run(&all);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn column(report: &Value, section: &str, name: &str) -> Vec<f64> {
    let s = report["sections"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["name"] == section)
        .unwrap_or_else(|| panic!("no section {section}"));
    s["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[name].as_str().unwrap().parse().unwrap())
        .collect()
}

fn schema_valid(report: &Value) -> bool {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap().is_valid(report)
}

#[test]
fn oscillator_effective_energies() {
    let r = json(&[
        "spectrum",
        "--problem",
        "oscillator",
        "--n",
        "0..3",
        "--J",
        "0",
        "--k",
        "1",
    ]);
    assert_eq!(column(&r, "levels", "E_eff"), vec![3.0, 7.0, 11.0, 15.0]);
    assert!(schema_valid(&r));
}

#[test]
fn free_coulomb_level_is_rest_energy() {
    let r = json(&[
        "spectrum",
        "--problem",
        "coulomb",
        "--alphaZ",
        "0",
        "--J",
        "0",
        "--n",
        "1",
    ]);
    assert_eq!(column(&r, "levels", "E"), vec![1.0]);
    assert_eq!(column(&r, "levels", "B"), vec![0.0]);
}

#[test]
fn general_family_level() {
    let r = json(&[
        "spectrum",
        "--problem",
        "general",
        "--a",
        "1",
        "--b",
        "1",
        "--m",
        "0",
        "--N",
        "0",
        "--n",
        "1",
    ]);
    assert_eq!(column(&r, "levels", "w"), vec![10.0]);
}

#[test]
fn aim_mode_matches_closed_form() {
    let r = json(&[
        "spectrum",
        "--problem",
        "oscillator",
        "--n",
        "0..2",
        "--J",
        "1",
        "--k",
        "0.5",
        "--mode",
        "compare",
    ]);
    for d in column(&r, "compare", "dev_cf_aim") {
        assert!(d < 1e-25, "{d}");
    }
    for d in column(&r, "compare", "dev_cf_oracle") {
        assert!(d < 1e-6, "{d}");
    }
    assert!(schema_valid(&r));
}

#[test]
fn csv_headers_are_stable() {
    let out = run(&[
        "spectrum",
        "--problem",
        "oscillator",
        "--n",
        "0",
        "--k",
        "1",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("n,J,N,E_eff,E,method"));
}

#[test]
fn wavefunction_nodes() {
    let r = json(&[
        "wavefunction",
        "--problem",
        "oscillator",
        "--n",
        "1",
        "--J",
        "0",
        "--k",
        "1",
        "--points",
        "2001",
    ]);
    let nodes = column(&r, "nodes", "r");
    assert_eq!(nodes.len(), 1);
    assert!((nodes[0] - 1.5f64.sqrt()).abs() < 1e-4, "{nodes:?}");
    assert!(schema_valid(&r));

    let r = json(&[
        "wavefunction",
        "--problem",
        "coulomb",
        "--alphaZ",
        "0",
        "--n",
        "2",
        "--points",
        "2001",
    ]);
    let nodes = column(&r, "nodes", "rho");
    assert_eq!(nodes.len(), 1);
    assert!((nodes[0] - 2.0).abs() < 1e-4, "{nodes:?}");
}

#[test]
fn ground_state_is_nodeless_with_one_maximum() {
    let r = json(&[
        "wavefunction",
        "--problem",
        "oscillator",
        "--n",
        "0",
        "--k",
        "1",
        "--points",
        "401",
    ]);
    let f = column(&r, "wavefunction", "F");
    assert!(f.iter().skip(1).all(|v| *v > 0.0));
    let rises = f.windows(2).filter(|w| w[1] > w[0]).count();
    let peak = f
        .iter()
        .cloned()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
        .0;
    assert_eq!(rises, peak);
}

#[test]
fn components_reject_the_origin() {
    let out = run(&[
        "wavefunction",
        "--problem",
        "oscillator",
        "--n",
        "1",
        "--k",
        "1",
        "--components",
        "--r-min",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&[
        "wavefunction",
        "--problem",
        "oscillator",
        "--n",
        "1",
        "--k",
        "1",
        "--components",
        "--points",
        "21",
    ]);
    let s = &r["sections"][0];
    assert_eq!(s["columns"], serde_json::json!(["r", "F", "G", "H+1", "H-1"]));
}

#[test]
fn diagnose_oscillator_converges() {
    let r = json(&["diagnose", "--problem", "oscillator", "--n", "2", "--k", "1"]);
    let summary = &r["sections"][1]["rows"][0];
    assert_eq!(summary["status"], "converged");
    let rows = r["sections"][0]["rows"].as_array().unwrap();
    for row in rows
        .iter()
        .filter(|row| row["k"].as_str().unwrap().parse::<usize>().unwrap() >= 3)
    {
        let root: f64 = row["root"].as_str().unwrap().parse().unwrap();
        assert!((root - 11.0).abs() < 1e-12, "{row}");
    }
    assert!(schema_valid(&r));
}

#[test]
fn config_round_trip_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.cfg");
    let file = file.to_str().unwrap();
    let first = run(&[
        "spectrum",
        "--problem",
        "oscillator",
        "--n",
        "0..2",
        "--k",
        "2",
        "--precision",
        "40",
        "--save-config",
        file,
    ]);
    assert!(first.status.success());
    let text = std::fs::read_to_string(file).unwrap();
    assert!(text.contains("precision = 40"));
    assert!(text.contains("k = 2"));

    let again = run(&["spectrum", "--config", file]);
    assert_eq!(again.stdout, first.stdout);

    let r = json(&["spectrum", "--config", file, "--precision", "60"]);
    assert_eq!(r["config"]["precision"], "60");
    assert_eq!(r["config"]["k"], "2");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["spectrum", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "--n", "1"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    let sup = run(&[
        "spectrum",
        "--problem",
        "coulomb",
        "--alphaZ",
        "0.6",
        "--J",
        "0",
        "--n",
        "1",
    ]);
    assert_eq!(sup.status.code(), Some(4));
    let conflict = run(&["spectrum", "--problem", "oscillator", "--k", "1", "--omega", "2"]);
    assert_eq!(conflict.status.code(), Some(1));
}

#[test]
fn golden_mismatch_exits_three() {
    let out = run(&[
        "reproduce-table",
        "--table",
        "1",
        "--k-schedule",
        "5,10",
        "--tolerance",
        "1e-12",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["status"], "mismatch");
    assert!(schema_valid(&r));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cells outside tolerance"));
}
