//! Drives the `alloc` binary: outputs, seed override and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"{
  "scenario": "II",
  "deployment": {"n_macro": 2, "n_small": 4, "n_level1": 2},
  "demand_sweep": [1e9, 3e9],
  "seeds": [1, 2],
  "mechanisms": ["minmax", "vcg", "oracle"]
}"#;

fn alloc(args: &[&str], dir: &Path, seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_alloc"));
    cmd.args(args).current_dir(dir).env_remove("ALLOC_SEED");
    if let Some(s) = seed {
        cmd.env("ALLOC_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn setup(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.json"), config).unwrap();
    dir
}

#[test]
fn run_writes_csv_and_sidecar() {
    let dir = setup(SMALL);
    let out = alloc(&["run", "--config", "cfg.json", "--out", "res", "--dump-assignments", "--jobs", "2"], dir.path(), None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("res/results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 3);
    assert!(csv.starts_with("scenario,mechanism,demand_gbps,seed,status,outage_overall,outage_mno_1"));
    let json = fs::read_to_string(dir.path().join("res/assignments.json")).unwrap();
    assert_eq!(json.matches("\"mechanism\"").count(), 12);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = setup(SMALL);
    for out_dir in ["a", "b"] {
        assert!(alloc(&["run", "--config", "cfg.json", "--out", out_dir], dir.path(), None).status.success());
    }
    let a = fs::read(dir.path().join("a/results.csv")).unwrap();
    let b = fs::read(dir.path().join("b/results.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn seed_override_replaces_config_seeds() {
    let dir = setup(SMALL);
    assert!(alloc(&["run", "--config", "cfg.json", "--out", "o"], dir.path(), Some("9, 10")).status.success());
    let csv = fs::read_to_string(dir.path().join("o/results.csv")).unwrap();
    let seeds: std::collections::BTreeSet<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(seeds.into_iter().collect::<Vec<_>>(), vec!["10", "9"]);

    let bad = alloc(&["run", "--config", "cfg.json", "--out", "o"], dir.path(), Some("nine"));
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn compare_identical_files_has_zero_deltas() {
    let dir = setup(SMALL);
    assert!(alloc(&["run", "--config", "cfg.json", "--out", "o"], dir.path(), None).status.success());
    let out = alloc(&["compare", "o/results.csv", "o/results.csv"], dir.path(), None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("demand_gbps,"));
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[3], "0");
        assert_eq!(cols[6], "0");
        assert_eq!(&cols[7..], ["true", "true"]);
    }

    fs::write(dir.path().join("broken.csv"), "demand_gbps,seed\n1,1\n").unwrap();
    let out = alloc(&["compare", "broken.csv", "o/results.csv"], dir.path(), None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_reports_every_cell() {
    let dir = setup(SMALL);
    let out = alloc(&["oracle", "--config", "cfg.json"], dir.path(), None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1 + 4);

    let big = setup(r#"{"scenario": "I", "seeds": [1]}"#);
    assert_eq!(alloc(&["oracle", "--config", "cfg.json"], big.path(), None).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = setup(r#"{"scenario": "IV"}"#);
    assert_eq!(alloc(&[], dir.path(), None).status.code(), Some(1));
    assert_eq!(alloc(&["run"], dir.path(), None).status.code(), Some(1));
    assert_eq!(alloc(&["run", "--config", "missing.json"], dir.path(), None).status.code(), Some(1));
    assert_eq!(alloc(&["run", "--config", "cfg.json"], dir.path(), None).status.code(), Some(2));
    assert_eq!(alloc(&["--help"], dir.path(), None).status.code(), Some(0));

    let ok = setup(SMALL);
    fs::write(ok.path().join("taken"), "a file, not a directory").unwrap();
    let out = alloc(&["run", "--config", "cfg.json", "--out", "taken"], ok.path(), None);
    assert_eq!(out.status.code(), Some(3));
}
