use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_likewise"))
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(name)
}

fn run(spec: &Path, command: &str, extra: &[&str]) -> Output {
    bin().arg("--spec").arg(spec).args(["--command", command]).args(extra).output().unwrap()
}

fn error_code(out: &Output) -> String {
    let doc: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    doc["error"]["code"].as_str().unwrap().to_string()
}

#[test]
fn verify_passes_on_shipped_spec() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = run(&shipped("plane_line.json"), "verify", &["--out", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["all_passed"], true);
    let checks = doc["checks"].as_array().unwrap();
    assert!(checks.len() >= 15);
    for check in checks {
        assert_eq!(check["status"], "pass", "{check}");
        assert!(check["max_residual"].as_f64().unwrap() <= check["tolerance"].as_f64().unwrap());
    }
}

#[test]
fn verify_is_deterministic() {
    let a = run(&shipped("plane_line.json"), "verify", &["--seed", "17"]);
    let b = run(&shipped("plane_line.json"), "verify", &["--seed", "17"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&shipped("plane_line.json"), "verify", &["--seed", "18"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn failing_check_gives_nonzero_exit() {
    // At nu = 40 the bilateral sum needs far more Hermite terms than the
    // fixed cut of 20, so that check fails and the report says so.
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("steep.json");
    fs::write(&spec, r#"{"dimension": 2, "basis": [[1.0, 0.0]], "alpha": [0.3], "nu": 40.0}"#).unwrap();
    let out = run(&spec, "verify", &[]);
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["all_passed"], false);
    let failed: Vec<&str> = doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "fail")
        .map(|c| c["check_name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, vec!["bargmann.bilateral_sum"]);
}

#[test]
fn rank_deficient_spec_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("dep.json");
    fs::write(&spec, r#"{"dimension": 2, "basis": [[1.0, 0.0], [2.0, 0.0]], "nu": 1.0}"#).unwrap();
    let out = run(&spec, "verify", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "RankDeficient");
    assert!(out.stdout.is_empty());
}

#[test]
fn non_character_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("table.json");
    fs::write(
        &spec,
        r#"{"dimension": 1, "basis": [[1.0]], "nu": 1.0,
            "phase_table": [{"coords": [1], "phase": 0.1}, {"coords": [2], "phase": 0.3}]}"#,
    )
    .unwrap();
    let out = run(&spec, "eval-basis", &[]);
    assert_eq!(error_code(&out), "NotACharacter");
    fs::write(
        &spec,
        r#"{"dimension": 1, "basis": [[1.0]], "nu": 1.0, "points": [[0.2]],
            "phase_table": [{"coords": [1], "phase": 0.1}, {"coords": [2], "phase": 0.2}]}"#,
    )
    .unwrap();
    assert!(run(&spec, "eval-basis", &[]).status.success());
}

#[test]
fn missing_file_and_bad_tolerance() {
    let out = run(Path::new("/nonexistent/spec.json"), "verify", &[]);
    assert_eq!(error_code(&out), "IoError");
    let out = run(&shipped("plane_line.json"), "verify", &["--tol", "2"]);
    assert_eq!(error_code(&out), "InvalidInput");
}

#[test]
fn eval_theta_reference_value() {
    let out = run(&shipped("theta_unit.json"), "eval-theta", &[]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["z1_re", "z1_im", "re", "im"]);
    let first = reader.records().next().unwrap().unwrap();
    let re: f64 = first[2].parse().unwrap();
    let im: f64 = first[3].parse().unwrap();
    assert!((re - 1.086_434_811_2).abs() < 1e-9, "{re}");
    assert_eq!(im, 0.0);
}

#[test]
fn eval_basis_bargmann_and_gram_table() {
    let spec = shipped("plane_line.json");
    let out = run(&spec, "eval-basis", &[]);
    assert!(out.status.success());
    let rows = csv::Reader::from_reader(out.stdout.as_slice()).records().count();
    assert_eq!(rows, 5 * 3);

    let out = run(&spec, "bargmann", &[]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(reader.headers().unwrap().len(), 2 * 2 + 3);
    assert_eq!(reader.records().count(), 2);

    let out = run(&spec, "gram-table", &[]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let mut count = 0;
    for row in reader.records() {
        let row = row.unwrap();
        let numeric: f64 = row[4].parse().unwrap();
        let analytic: f64 = row[6].parse().unwrap();
        assert!((numeric - analytic).abs() <= 1e-8 * analytic.max(1.0));
        count += 1;
    }
    assert_eq!(count, 25);
}

#[test]
fn bargmann_requires_coefficients() {
    let out = run(&shipped("theta_unit.json"), "bargmann", &[]);
    assert_eq!(out.status.code(), Some(2));
}
