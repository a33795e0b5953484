use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_radar-sg");

fn reference_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/reference.json")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn radar-sg")
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn stderr_error(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().unwrap_or_default();
    serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

#[test]
fn ps_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ps.csv");
    let o = run(&[
        "ps",
        "--scenario",
        reference_path().to_str().unwrap(),
        "--sweep",
        "range_m:10:250:13",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(header, ["range_m", "p_success", "p_success_wc", "p_success_il"]);
    assert_eq!(rows.len(), 13);
    assert_eq!((rows[0][0], rows[12][0]), (10.0, 250.0));
    for r in &rows {
        assert!(r[1..].iter().all(|p| (0.0..=1.0).contains(p)), "{r:?}");
        // the worst case puts every interferer on the own lane
        assert!(r[2] <= r[1] + 1e-9, "{r:?}");
    }
    for w in rows.windows(2) {
        assert!(w[1][1] <= w[0][1] + 1e-9);
    }
}

#[test]
fn scenario_field_sweep_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mean.json");
    let o = run(&[
        "mean",
        "--scenario",
        reference_path().to_str().unwrap(),
        "--sweep",
        "duty_cycle:0.05:0.2:4",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["command"], "mean");
    assert_eq!(v["columns"][0], "duty_cycle");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    // The mean is linear in the duty cycle.
    let m0 = rows[0][1].as_f64().unwrap() / rows[0][0].as_f64().unwrap();
    for r in rows {
        let m = r[1].as_f64().unwrap() / r[0].as_f64().unwrap();
        assert!((m / m0 - 1.0).abs() < 1e-12);
    }
}

#[test]
fn mc_samples_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut tables = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("mc{threads}.csv"));
        let raw = dir.path().join(format!("mc{threads}.bin"));
        let o = run(&[
            "mc",
            "--scenario",
            reference_path().to_str().unwrap(),
            "--replicates",
            "200",
            "--seed",
            "17",
            "--threads",
            threads,
            "--samples-out",
            raw.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let bytes = std::fs::read(&raw).unwrap();
        assert_eq!(bytes.len(), 200 * 8);
        let first = f64::from_le_bytes(bytes[..8].try_into().unwrap());
        let csv = std::fs::read_to_string(&out).unwrap();
        let (header, rows) = csv_rows(&csv);
        assert_eq!(header, ["replicate", "interference_watts"]);
        assert_eq!(rows[0][1], first);
        tables.push(csv);
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn unknown_field_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(reference_path()).unwrap().replacen('{', "{\"colour\": 1,", 1);
    let scenario = dir.path().join("bad.json");
    std::fs::write(&scenario, text).unwrap();
    let out = dir.path().join("x.csv");
    let o = run(&["mean", "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_error(&o);
    assert_eq!(e["error"]["kind"], "schema");
    assert!(e["error"]["message"].as_str().unwrap().contains("colour"));
    assert!(!out.exists());
}

#[test]
fn out_of_range_value_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(reference_path()).unwrap().replace("\"duty_cycle\": 0.1", "\"duty_cycle\": 2.0");
    let scenario = dir.path().join("bad.json");
    std::fs::write(&scenario, text).unwrap();
    let o = run(&["ps", "--scenario", scenario.to_str().unwrap(), "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_error(&o)["error"]["message"].as_str().unwrap().contains("duty_cycle"));
}

#[test]
fn usage_errors() {
    let o = run(&["ps", "--scenario", reference_path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_error(&o)["error"]["kind"], "usage");

    let o = run(&["ps", "--scenario", reference_path().to_str().unwrap(), "--out", "x", "--sweep", "colour:1:2:3"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("--scenario"));
}

#[test]
fn missing_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "mean",
        "--scenario",
        dir.path().join("nope.json").to_str().unwrap(),
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr_error(&o)["error"]["kind"].is_string());
}
