use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_susy-tfd"))
        .args(args)
        .env_remove("SUSY_TFD_WORKERS")
        .output()
        .expect("binary runs")
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn spectrum_values(out: &Output) -> Vec<f64> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("index"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn verify_passes_for_supersymmetric_model() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.json");
    let out = run(&[
        "verify",
        "--omega1",
        "1",
        "--alpha2",
        "0.5",
        "--nb",
        "64",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json_file(&path);
    assert_eq!(doc["passed"], Value::Bool(true));
    assert!(doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == Value::Bool(true)));
}

#[test]
fn verify_fails_for_detuned_model() {
    let out = run(&["verify", "--omega2", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["passed"], Value::Bool(false));
}

#[test]
fn verify_without_coupling_notes_identity_transform() {
    let out = run(&["verify", "--alpha2", "0", "--nb", "32"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let notes = doc["notes"].as_array().unwrap();
    assert!(notes
        .iter()
        .any(|n| n.as_str().unwrap().contains("identity")));
}

#[test]
fn spectrum_is_paired() {
    let out = run(&["spectrum", "-k", "7"]);
    assert!(out.status.success());
    let got = spectrum_values(&out);
    for (v, w) in got.iter().zip([0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0]) {
        assert!((v - w).abs() < 1e-9, "{v} vs {w}");
    }
    assert_eq!(got.len(), 7);

    let free = spectrum_values(&run(&[
        "spectrum", "--omega1", "2", "--alpha2", "0", "-k", "5", "--nb", "16",
    ]));
    for (v, w) in free.iter().zip([0.0, 2.0, 2.0, 4.0, 4.0]) {
        assert!((v - w).abs() < 1e-9);
    }

    assert_eq!(spectrum_values(&run(&["spectrum", "-k", "1"])).len(), 1);
}

#[test]
fn thermal_sweep_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let t = 1.0 / 2f64.ln();
    let out = run(&[
        "thermal-sweep",
        "--tmin",
        &t.to_string(),
        "--tmax",
        "2.0",
        "--points",
        "2",
        "--plot",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("sweep.svg").exists());
    assert!(dir.path().join("sweep.dat").exists());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# susy-tfd"));
    let mut lines = text.lines().skip(1);
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "E0_over_omega1").unwrap();
    let first: f64 = lines
        .next()
        .unwrap()
        .split(',')
        .nth(col)
        .unwrap()
        .parse()
        .unwrap();
    assert!((first - 4.0 / 3.0).abs() < 1e-8, "{first}");
}

#[test]
fn small_cutoff_flags_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("hot.csv");
    let out = run(&[
        "thermal-sweep",
        "--tmin",
        "1.5",
        "--tmax",
        "2",
        "--points",
        "2",
        "--nb",
        "24",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flagged"));

    // Too small to hold the dressed supercharge at all.
    let out = run(&[
        "thermal-sweep",
        "--points",
        "2",
        "--nb",
        "8",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thermal_sweep_rejects_detuning() {
    let out = run(&["thermal-sweep", "--omega2", "2", "--points", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn frequencies_roots_and_errors() {
    let doc: Value =
        serde_json::from_slice(&run(&["frequencies", "--omega2", "5", "--alpha2", "2"]).stdout)
            .unwrap();
    assert_eq!(doc["omega1_minus"].as_f64(), Some(1.0));
    assert_eq!(doc["omega1_plus"].as_f64(), Some(4.0));

    let doc: Value =
        serde_json::from_slice(&run(&["frequencies", "--omega2", "4", "--alpha2", "2"]).stdout)
            .unwrap();
    assert_eq!(doc["degenerate"], Value::Bool(true));
    assert!((doc["omega1_plus"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let out = run(&["frequencies", "--omega2", "3", "--alpha2", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["error"].as_str(), Some("complex-roots"));
}

#[test]
fn goldstino_json_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let out = run(&[
        "--workers",
        "2",
        "goldstino",
        "--tmin",
        "0.3",
        "--tmax",
        "0.5",
        "--points",
        "2",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = json_file(&path);
    for r in rows.as_array().unwrap() {
        let num = r["norm_g2s"].as_f64().unwrap();
        let cf = r["closed_form"].as_f64().unwrap();
        assert!(((num - cf) / cf).abs() < 1e-8);
    }
}
