//! Drives the `ephq` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

fn ephq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ephq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SMALL: &str = r#"
engines = ["exact", "ed"]
observables = ["populations", "gate_counts"]
[model]
n_sites = 2
hopping = [[0.0, 1.0], [1.0, 0.0]]
frequencies = [[1.0], [1.0]]
couplings = [[0.3], [0.3]]
qubits_per_mode = 1
[plan]
total_time = 1.5
steps = [6]
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = ephq(&["run", &config, "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let listed = stdout(&o);
    assert!(listed.contains("exact_eta6_populations.csv"));
    assert!(listed.contains("gate_counts.csv"));

    let csv = std::fs::read_to_string(out.join("exact_eta6_populations.csv")).unwrap();
    assert!(csv.starts_with("time,site_0,site_1\n"));
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().count(), 7);

    let counts = std::fs::read_to_string(out.join("gate_counts.csv")).unwrap();
    assert_eq!(counts.lines().nth(1), Some("6,6,12,36,73"));

    let exact = out.join("exact_eta6_populations.csv");
    let ed = out.join("ed_populations.csv");
    let o = ephq(&["compare", exact.to_str().unwrap(), ed.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    let overall = text.lines().find(|l| l.starts_with("overall,")).unwrap();
    let max: f64 = overall.split(',').nth(1).unwrap().parse().unwrap();
    assert!(max < 0.02, "{text}");

    let o = ephq(&["compare", ed.to_str().unwrap(), ed.to_str().unwrap()]);
    assert!(stdout(&o).contains("overall,0,0"));
}

#[test]
fn invalid_config_exits_nonzero_with_error_list() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SMALL
        .replace("\"exact\", \"ed\"", "\"exact\", \"bogus\"")
        .replace("total_time = 1.5", "total_time = -1.0");
    let config = write_config(dir.path(), &bad);
    let o = ephq(&["run", &config, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&o.stderr).expect("JSON error report");
    let fields: Vec<&str> = report["errors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["field"].as_str().unwrap())
        .collect();
    assert!(fields.contains(&"engines[1]"));
    assert!(fields.contains(&"plan.total_time"));
}

#[test]
fn large_preset_needs_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = ephq(&["run", "appendixD-full", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--allow-large"));
}

#[test]
fn compare_rejects_mismatched_grids() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    std::fs::write(&a, "time,site_0\n0.5,1\n").unwrap();
    std::fs::write(&b, "time,site_0\n0.25,1\n").unwrap();
    let o = ephq(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent"));
}

#[test]
fn presets_are_listed() {
    let o = ephq(&["presets"]);
    let names = stdout(&o);
    for name in ["fig4-upper", "fig6-right", "appendixC", "appendixD-small"] {
        assert!(names.lines().any(|l| l == name), "{name}");
    }
}
