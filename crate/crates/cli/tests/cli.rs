use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
name = "short-street"
description = "One signal and a stop sign."

[route]
length = 300.0
deadline = 70.0

[[route.speed_limits]]
start = 0.0
end = 300.0
min = 0.0
max = 14.0

[[signals]]
kind = "signal"
position = 150.0
cycle_period = 60.0
red_duration = 30.0
clock_offset = 5.0

[signals.delay]
family = "preset"
name = "moderate"

[[signals]]
kind = "stop"
position = 300.0

[grid]
distance_step = 10.0
velocity_step = 1.0
time_step = 1.0
"#;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecodrive"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn scenario(dir: &Path) -> String {
    let path = dir.join("small.toml");
    fs::write(&path, SMALL).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn lists_builtin_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["scenarios"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("route1-deterministic") && text.contains("route2-robust-moderate"));
}

#[test]
fn solve_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path());
    for name in ["a.csv", "b.csv"] {
        let out = run(
            &[
                "solve", &sc, "--eta", "0.8", "--out", name, "--svg", "p.svg",
            ],
            dir.path(),
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert!(fs::read_to_string(dir.path().join("p.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path());
    for (threads, name) in [("1", "one.csv"), ("3", "three.csv")] {
        let out = run(
            &["--threads", threads, "solve", &sc, "--out", name],
            dir.path(),
        );
        assert!(out.status.success());
    }
    assert_eq!(
        fs::read(dir.path().join("one.csv")).unwrap(),
        fs::read(dir.path().join("three.csv")).unwrap()
    );
}

#[test]
fn out_of_range_reliability_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path());
    let out = run(&["solve", &sc, "--eta", "1.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta"));
}

#[test]
fn impossible_deadline_reports_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path());
    let out = run(&["solve", &sc, "--tf", "10"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_requires_levels() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path());
    assert_eq!(run(&["sweep", &sc], dir.path()).status.code(), Some(2));
    assert_eq!(
        run(&["sweep", &sc, "--etas", ""], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn sweep_writes_table_and_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path());
    let out = run(
        &["sweep", &sc, "--etas", "0,0.5", "--out", "sw"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = fs::read_to_string(dir.path().join("sw/sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn idm_evaluate_and_table_chain() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path());
    assert!(run(&["idm", &sc, "--out", "idm.csv"], dir.path())
        .status
        .success());
    assert!(run(&["solve", &sc, "--out", "fuel.csv"], dir.path())
        .status
        .success());

    let out = run(&["table", "idm.csv", "fuel.csv"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("idm") && text.contains("op-fuel"));

    let out = run(
        &[
            "evaluate",
            &sc,
            "--trajectory",
            "fuel.csv",
            "--samples",
            "200",
            "--out",
            "mc.csv",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(fs::metadata(dir.path().join("mc.csv")).unwrap().len() > 0);
}

#[test]
fn missing_scenario_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "no-such-file.toml"], dir.path());
    assert!(!out.status.success());
}
