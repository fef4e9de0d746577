use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_driftbench")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

/// Generates a dataset into `dir` and returns the detect config path.
fn generated(dir: &Path, synth: &str, seed: u64) -> std::path::PathBuf {
    let cfg = write(dir, "gen.json", &format!(r#"{{"synth":{synth},"seed":{seed},"output":"data.csv"}}"#));
    let out = run(&["generate", "--config", p(&cfg)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("data.detect.json")
}

#[test]
fn uc2_alarm_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = generated(dir.path(), r#"{"scenario":"uc2_dataset"}"#, 2);
    let report = dir.path().join("r.json");
    let out = run(&["detect", "--config", p(&cfg), "--out", p(&report)]);
    assert_eq!(out.status.code(), Some(3));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["share"], 1.0);
    assert_eq!(json["alarm"], true);
    assert_eq!(json["groups"]["ks"], "1");
    for key in ["dataset", "split_timestamp", "variables", "share", "alarm", "seed"] {
        assert!(json.get(key).is_some(), "{key}");
    }
}

#[test]
fn null_data_rarely_alarms() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = generated(dir.path(), r#"{"scenario":"custom"}"#, 0);
    let mut quiet = 0;
    for seed in 0..100 {
        let gen = write(
            dir.path(),
            "gen.json",
            &format!(r#"{{"synth":{{"scenario":"custom"}},"seed":{seed},"output":"data.csv"}}"#),
        );
        assert_eq!(run(&["generate", "--config", p(&gen)]).status.code(), Some(0));
        let out = run(&["detect", "--config", p(&cfg), "--out", p(&dir.path().join("r.json"))]);
        if out.status.code() == Some(0) {
            quiet += 1;
        }
    }
    assert!(quiet >= 90, "{quiet}/100");
}

#[test]
fn missing_schema_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"dataset":"x.csv","split_timestamp":0}"#);
    let out = run(&["detect", "--config", p(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("missing config key: schema"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"datasets":"x.csv"}"#);
    assert_eq!(run(&["detect", "--config", p(&cfg)]).status.code(), Some(1));
}

#[test]
fn unreadable_dataset_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"dataset":"absent.csv","schema":{"time":{"role":"time_index"},"x":{"role":"input"}},"split_timestamp":0}"#,
    );
    assert_eq!(run(&["detect", "--config", p(&cfg)]).status.code(), Some(2));
}

#[test]
fn bad_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = generated(dir.path(), r#"{"scenario":"custom"}"#, 1);
    assert_eq!(run(&["detect", "--config", p(&cfg), "--methods", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["detect", "--config", p(&cfg), "--chunks", "weekly"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn generate_uc1_columns_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.json", r#"{"synth":{"scenario":"uc1_concept"},"seed":4}"#);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(run(&["generate", "--config", p(&cfg), "--out", p(&a)]).status.code(), Some(0));
    assert_eq!(run(&["generate", "--config", p(&cfg), "--out", p(&b)]).status.code(), Some(0));
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().next(), Some("time,co2,temperature,occupancy,prediction"));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(dir.path().join("a.truth.json")).unwrap(),
        std::fs::read(dir.path().join("b.truth.json")).unwrap()
    );
}

#[test]
fn invalid_scenario_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.json", r#"{"synth":{"scenario":"uc9"},"output":"x.csv"}"#);
    assert_eq!(run(&["generate", "--config", p(&cfg)]).status.code(), Some(1));
}

fn bench_config(dir: &Path, reps: usize, report: &str) -> std::path::PathBuf {
    write(
        dir,
        "b.json",
        &format!(
            r#"{{"synth":{{"scenario":"custom","rows":1000}},"methods":"all","output":"results.csv",
               "benchmark":{{"repetitions":{reps},"report":"{report}"}}}}"#
        ),
    )
}

#[test]
fn benchmark_writes_one_row_per_repetition() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["benchmark", "--config", p(&bench_config(dir.path(), 5, "detect_only"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.lines().skip(1).all(|l| l.contains(",false,")));
}

#[test]
fn single_repetition_sigma_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["benchmark", "--config", p(&bench_config(dir.path(), 1, "detect_only"))]);
    let table = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = table.lines().nth(1).unwrap().split_whitespace().collect();
    assert_eq!(row[6], "0.000", "{table}");
}

#[test]
fn both_report_modes_give_two_summary_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["benchmark", "--config", p(&bench_config(dir.path(), 2, "both"))]);
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().count(), 3, "{table}");
}

#[test]
fn report_bundle_from_detect_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = generated(dir.path(), r#"{"scenario":"uc2_dataset"}"#, 6);
    let report = dir.path().join("r.json");
    run(&["detect", "--config", p(&cfg), "--out", p(&report)]);
    let rcfg = write(dir.path(), "rep.json", r#"{"report":"r.json"}"#);
    let bundle_path = dir.path().join("bundle.json");
    let out = run(&["report", "--config", p(&rcfg), "--out", p(&bundle_path)]);
    assert_eq!(out.status.code(), Some(0));
    let bundle: serde_json::Value = serde_json::from_slice(&std::fs::read(&bundle_path).unwrap()).unwrap();
    let vars = bundle["variables"].as_array().unwrap();
    assert_eq!(vars.len(), 2);
    let detect: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    for (v, d) in vars.iter().zip(detect["variables"].as_array().unwrap()) {
        assert_eq!(v["histogram"]["edges"], d["profile"]["histogram"]["edges"]);
        assert!(v["chunks"].is_null());
        assert!(!v["notices"].as_array().unwrap().is_empty());
    }
}

#[test]
fn report_rejects_garbage() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "r.json", "{}");
    let rcfg = write(dir.path(), "rep.json", r#"{"report":"r.json"}"#);
    assert_eq!(run(&["report", "--config", p(&rcfg)]).status.code(), Some(2));
}
