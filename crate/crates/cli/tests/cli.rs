use std::path::Path;
use std::process::{Command, Output};

fn floorlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floorlab")).args(args).output().unwrap()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn run_config(text: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg = dir.join("exp.conf");
    std::fs::write(&cfg, text).unwrap();
    let mut args = vec!["run", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    floorlab(&args)
}

#[test]
fn catalog_json_lists_the_families() {
    let out = floorlab(&["catalog", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    for n in ["power", "power_log", "oscillating", "rotation", "heisenberg", "sqrt2"] {
        assert!(names.contains(&n), "{n} missing");
    }
    let text = floorlab(&["catalog"]);
    assert!(String::from_utf8_lossy(&text.stdout).starts_with("functions:"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(floorlab(&["run"]).status.code(), Some(2));
    assert_eq!(floorlab(&["catalog", "--yaml"]).status.code(), Some(2));
    assert_eq!(floorlab(&["run", "--config", "/nonexistent/x.conf"]).status.code(), Some(2));
    assert_eq!(floorlab(&["run", "--config", &fixture("12_bad_exponent.conf")]).status.code(), Some(2));
    assert_eq!(floorlab(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("kind = recurrence\nset = disc:0,1\n", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`set`"));
    let out = run_config("kind = pet\nfamilies = many\n", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`families`"));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("03_weyl_strict.conf");
    let out = floorlab(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("FAIL"));
}

#[test]
fn pet_run_writes_both_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("kind = pet\nname = p\nfunction = power:c=3.5\nfamilies = 20\n", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("p.json")).unwrap()).unwrap();
    assert_eq!(v["kind"], "pet");
    assert_eq!(v["result"]["failures"], 0);
    let csv = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn seed_flag_overrides_config_and_runs_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let text = "kind = pet\nname = p\nfamilies = 30\nseed = 1\n";
    let read = |d: &Path| std::fs::read(d.join("p.csv")).unwrap();
    run_config(text, dir.path(), &[]);
    let first = read(dir.path());
    run_config(text, dir.path(), &[]);
    assert_eq!(first, read(dir.path()));
    run_config(text, dir.path(), &["--seed", "2"]);
    assert_ne!(first, read(dir.path()));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("p.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 2);
}
