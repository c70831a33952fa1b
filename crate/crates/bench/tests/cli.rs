use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tcac_bench::measurement::{MeasurementRow, MeasurementSeries};

fn tcac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcac")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn series(id: &str, values: &[(f64, f64)]) -> MeasurementSeries {
    MeasurementSeries {
        fixture_id: id.into(),
        quantity: "I_s".into(),
        unit: "A".into(),
        abscissa: "f_hz".into(),
        provenance: "test".into(),
        digitized: false,
        rows: values
            .iter()
            .map(|&(x, value)| MeasurementRow {
                x,
                value,
                tolerance: None,
                excitation_a: None,
            })
            .collect(),
    }
}

#[test]
fn geometry_prints_slice_lengths() {
    let o = tcac(&["geometry", "--cable", "C2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("cable,slice_length_mm"), "{out}");
    assert!(out.contains("C2,11.84"), "{out}");
}

#[test]
fn unknown_study_lists_the_options() {
    let o = tcac(&["study", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for name in ["losses_C1", "resonances_C2", "energize_C2", "mf_C3"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn study_list_and_dry_run() {
    let o = tcac(&["study", "--list"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 9);

    let o = tcac(&["study", "resonances_C2", "--dry-run"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let plan: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(plan["provider_id"], "table:c2_constant");
}

#[test]
fn bad_arguments_exit_with_2() {
    assert_eq!(tcac(&["sweep", "--length", "1000"]).status.code(), Some(2));
    let o = tcac(&["sweep", "--table", "/nonexistent/t.csv", "--length", "1000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/t.csv"));
    assert_eq!(tcac(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn invalid_config_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"study": "sheath_C3", "colour": "blue"}"#).unwrap();
    let o = tcac(&["--config", cfg.to_str().unwrap(), "study", "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("run.json") && err.contains("colour"), "{err}");
}

#[test]
fn compare_reports_relative_differences() {
    let dir = tempfile::tempdir().unwrap();
    let measured = dir.path().join("m.csv");
    let computed = dir.path().join("c.csv");
    fs::write(&measured, series("meas", &[(50.0, 100.0), (120.0, 100.0)]).to_csv_string().unwrap()).unwrap();
    fs::write(&computed, series("calc", &[(50.0, 99.63), (120.0, 102.13)]).to_csv_string().unwrap()).unwrap();
    let o = tcac(&[
        "--format",
        "json",
        "compare",
        "--measured",
        measured.to_str().unwrap(),
        "--computed",
        computed.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let eps: Vec<f64> = report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["eps_pct"].as_f64().unwrap())
        .collect();
    assert!((eps[0] + 0.37).abs() < 1e-9 && (eps[1] - 2.13).abs() < 1e-9, "{eps:?}");
}

fn run_dir_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn study_writes_a_complete_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("sheath");
    let args = ["study", "sheath_C3", "--out", run.to_str().unwrap()];
    let o = tcac(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = fs::read(run.join("report.json")).unwrap();
    let files = run_dir_files(&run);
    assert_eq!(
        files,
        [
            "compare_sheath_current_c3.csv",
            "compare_sheath_current_c3_reference.csv",
            "manifest.json",
            "report.json",
            "sheath_current.csv"
        ]
    );
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["files"].as_array().unwrap().len(), 4);

    // re-running over the same directory replaces the outputs in place
    let o = tcac(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(run.join("report.json")).unwrap(), first);
    assert_eq!(run_dir_files(&run), files);

    let compare = fs::read_to_string(run.join("compare_sheath_current_c3.csv")).unwrap();
    assert!(compare.contains("analytic:C3") && compare.contains("sheath_current_c3"), "{compare}");
}

#[test]
fn locked_run_directory_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join(".lock"), "1").unwrap();
    let o = tcac(&["study", "resonances_C2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("report.json").exists());
}
