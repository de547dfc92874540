use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn oqs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oqs"))
        .args(args)
        .env_remove("OQS_THREADS")
        .output()
        .expect("failed to launch oqs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn construct(dir: &TempDir, name: &str, args: &[&str]) -> String {
    let path = dir.path().join(name);
    let mut full = vec!["construct"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path_str(&path)]);
    let out = oqs(&full);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path_str(&path).to_string()
}

fn analyze_json(path: &str, extra: &[&str]) -> Value {
    let mut args = vec!["analyze", path, "--json"];
    args.extend_from_slice(extra);
    let out = oqs(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn phase_damping_saturates_in_dimension_four() {
    let dir = TempDir::new().unwrap();
    let path = construct(&dir, "pd.json", &["phase-damping", "--dim", "4"]);
    let file: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(file["dim"], 4);
    let r = analyze_json(&path, &[]);
    assert_eq!(r["schema"], "oqs/1");
    assert_eq!(r["summary"]["l0_or_m0"], 10);
    assert_eq!(r["summary"]["lP_or_mP"], 10);
    assert_eq!(r["subspaces"]["stationary"], 10);
    for check in r["bounds"]["checks"].as_array().unwrap() {
        if check["kind"] == "theorem" {
            assert_eq!(check["margin"], 0, "{check}");
        }
    }
}

#[test]
fn phase_damping_report_in_dimension_three() {
    let dir = TempDir::new().unwrap();
    let path = construct(&dir, "pd3.json", &["phase-damping", "--dim", "3"]);
    let r = analyze_json(&path, &[]);
    assert_eq!(r["summary"]["l0_or_m0"], 5);
    assert_eq!(r["summary"]["lP_or_mP"], 5);
    assert_eq!(r["discrepancy"], false);
}

#[test]
fn hamiltonian_generator_has_five_stationary_directions() {
    let dir = TempDir::new().unwrap();
    let path = construct(&dir, "h.json", &["hamiltonian", "--dim", "3", "--h", "0,1"]);
    let r = analyze_json(&path, &[]);
    assert_eq!(r["subject"]["kind"], "generator");
    assert_eq!(r["classification"], "hamiltonian");
    assert_eq!(r["summary"]["l0_or_m0"], 5);
    assert_eq!(r["summary"]["lP_or_mP"], 9);
}

#[test]
fn dissipative_generator_in_dimension_two() {
    let dir = TempDir::new().unwrap();
    let path = construct(&dir, "diss.json", &["dissipative", "--dim", "2"]);
    let r = analyze_json(&path, &["--kind", "generator"]);
    assert_eq!(r["summary"]["l0_or_m0"], 2);
    let path = construct(
        &dir,
        "diss2.json",
        &["dissipative", "--dim", "4", "--lambda", "1,0.5i", "--lambda", "2,-1"],
    );
    assert_eq!(analyze_json(&path, &[])["summary"]["l0_or_m0"], 10);
}

#[test]
fn unitary_construction_and_invalid_parameters() {
    let dir = TempDir::new().unwrap();
    let path = construct(&dir, "u.json", &["unitary", "--dim", "3"]);
    let r = analyze_json(&path, &[]);
    assert_eq!(r["classification"], "unitary");
    assert_eq!(r["summary"]["l0_or_m0"], 5);
    let out = oqs(&["construct", "hamiltonian", "--dim", "3", "--h", "1,1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("distinct"));
}

#[test]
fn identity_channel_is_trivial() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("id.json");
    fs::write(
        &path,
        r#"{"dim": 2, "kraus": [{"rows": 2, "cols": 2, "entries": [[1, 0], [0, 0], [0, 0], [1, 0]]}]}"#,
    )
    .unwrap();
    let r = analyze_json(path_str(&path), &[]);
    assert_eq!(r["classification"], "trivial");
    assert_eq!(r["bounds"]["skipped"], true);
    assert!(r["bounds"]["checks"].as_array().unwrap().is_empty());
}

#[test]
fn sampled_generator_reports_ckks_margins() {
    let dir = TempDir::new().unwrap();
    let out = oqs(&[
        "sample",
        "--ensemble",
        "gkls-generic",
        "--dim",
        "3",
        "--count",
        "2",
        "--seed",
        "11",
        "--out-dir",
        path_str(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let path = dir.path().join("gkls-generic-d3-0001.json");
    let r = analyze_json(path_str(&path), &[]);
    assert_eq!(r["summary"]["l0_or_m0"], 1);
    assert!(!r["bounds"]["ckks"].as_array().unwrap().is_empty());
}

#[test]
fn sample_lines_are_reproducible() {
    let args = [
        "sample",
        "--ensemble",
        "cptp-stinespring",
        "--dim",
        "2",
        "--count",
        "3",
        "--seed",
        "5",
    ];
    let a = oqs(&args);
    let b = oqs(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["dim"], 2);
    }
    let out = oqs(&["sample", "--ensemble", "nope", "--dim", "2"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn syntax_errors_report_the_line() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\"dim\": 2,\n \"kraus\": [\n  {\"rows\": 2 \"cols\": 2}]}\n").unwrap();
    let out = oqs(&["analyze", path_str(&path)]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.contains("bad.json:3:"), "{err}");
    assert!(err.contains("{\"rows\": 2 \"cols\": 2}"), "{err}");
    let out = oqs(&["analyze", path_str(&dir.path().join("missing.json"))]);
    assert_eq!(code(&out), 1);
}

#[test]
fn validation_failures_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("ntp.json");
    fs::write(
        &path,
        r#"{"dim": 2, "kraus": [{"rows": 2, "cols": 2, "entries": [[2, 0], [0, 0], [0, 0], [1, 0]]}]}"#,
    )
    .unwrap();
    let out = oqs(&["analyze", path_str(&path)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("residual"));
    let path = dir.path().join("herm.json");
    fs::write(
        &path,
        r#"{"dim": 2, "hamiltonian": {"rows": 2, "cols": 2, "entries": [[0, 0], [1, 0], [0, 0], [0, 0]]}}"#,
    )
    .unwrap();
    assert_eq!(code(&oqs(&["analyze", path_str(&path)])), 2);
    let pd = construct(&dir, "pd.json", &["phase-damping", "--dim", "2"]);
    assert_eq!(code(&oqs(&["analyze", &pd, "--tol-cluster", "-1"])), 2);
}

fn numbers_in_json(v: &Value, out: &mut Vec<f64>) {
    match v {
        Value::Number(n) => out.push(n.as_f64().unwrap()),
        Value::Array(items) => items.iter().for_each(|i| numbers_in_json(i, out)),
        Value::Object(m) => m.values().for_each(|i| numbers_in_json(i, out)),
        _ => {}
    }
}

fn numbers_in_text(text: &str) -> Vec<f64> {
    text.split(|c: char| c.is_whitespace() || matches!(c, '[' | ']' | ','))
        .filter_map(|t| t.parse::<f64>().ok())
        .collect()
}

#[test]
fn table_and_json_carry_the_same_numbers() {
    let dir = TempDir::new().unwrap();
    let sample = oqs(&[
        "sample",
        "--ensemble",
        "gkls-unital",
        "--dim",
        "3",
        "--seed",
        "2",
        "--out-dir",
        path_str(dir.path()),
    ]);
    assert_eq!(code(&sample), 0);
    let inputs = [
        construct(&dir, "pd.json", &["phase-damping", "--dim", "3"]),
        path_str(&dir.path().join("gkls-unital-d3-0000.json")).to_string(),
    ];
    for input in inputs {
        let report = dir.path().join("report.json");
        let out = oqs(&["analyze", &input, "--table", "--report", path_str(&report)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let json: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
        let mut expected = Vec::new();
        numbers_in_json(&json, &mut expected);
        let mut found = numbers_in_text(&String::from_utf8(out.stdout).unwrap());
        expected.sort_by(f64::total_cmp);
        found.sort_by(f64::total_cmp);
        assert_eq!(found, expected);
    }
}

#[test]
fn verify_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let out = Command::new(env!("CARGO_BIN_EXE_oqs"))
            .args([
                "verify",
                "--dims",
                "2..4",
                "--per-dim",
                "5",
                "--seed",
                "7",
                "--out",
                path_str(&path),
            ])
            .env("OQS_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(summary["passed"], true);
        assert_eq!(summary["summary"]["violations"], 0);
        fs::read(path).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "4");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    // Header, four constructors and five samples from each of five ensembles per dimension.
    assert_eq!(text.lines().count(), 1 + 3 * (4 + 5 * 5));
}

#[test]
fn constructors_only_campaign_saturates() {
    let out = oqs(&["verify", "--constructors-only", "--dims", "2..6"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "theorem_min_margin").unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5 * 4);
    for row in rows {
        assert_eq!(row.split(',').nth(col), Some("0"), "{row}");
    }
}

#[test]
fn verify_rejects_bad_ranges() {
    assert_eq!(code(&oqs(&["verify", "--dims", "1..3", "--per-dim", "1"])), 2);
    assert_ne!(code(&oqs(&["verify", "--dims", "5..2"])), 0);
    let out = Command::new(env!("CARGO_BIN_EXE_oqs"))
        .args(["verify", "--dims", "2", "--per-dim", "1"])
        .env("OQS_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}
