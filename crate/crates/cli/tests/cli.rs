//! Binary-level tests: exit codes, flags, output shapes, and the audit
//! command's golden verdicts.

use std::path::Path;
use std::process::{Command, Output};

fn levelk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levelk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_example_a_mtp(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("mtp.json");
    std::fs::write(
        &path,
        r#"{
          "version": 1, "dt": 0.5,
          "agents": [{"id": 0, "origin": [0.0, 0.0], "modes": [
            {"confidence": 0.5, "points": [[1.0, 0.0]]},
            {"confidence": 0.5, "points": [[0.0, 1.0]]}
          ]}]
        }"#,
    )
    .unwrap();
    path
}

#[test]
fn help_and_version_exit_zero() {
    assert!(levelk(&["--help"]).status.success());
    assert!(levelk(&["run", "--help"]).status.success());
    assert!(levelk(&["--version"]).status.success());
}

#[test]
fn run_writes_expected_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let result = levelk(&[
        "run",
        "--suite",
        "straight:3",
        "--thresholds",
        "50,25",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr(&result));

    let levels = std::fs::read_to_string(out.join("levels.csv")).unwrap();
    let mut lines = levels.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scene,agent,level,entropy,active,min_ade,min_fde,miss,collision,\
         eval_count_gated,eval_count_ungated"
    );
    let rows = lines.count();

    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let agents: usize = summary
        .lines()
        .find_map(|l| l.strip_prefix("agents,"))
        .unwrap()
        .parse()
        .unwrap();
    // one row per agent and level, K = 3
    assert_eq!(rows, agents * 3);
    assert!(summary.contains("eval_reduction_pct,"));
}

#[test]
fn infinite_thresholds_reduce_by_two_thirds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let result = levelk(&[
        "run",
        "--suite",
        "straight:2",
        "--thresholds",
        "inf,inf",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    // level 0 only: 1 - 1/3 of the evals remain
    assert!(
        summary.contains("eval_reduction_pct,6.66666667e1"),
        "{summary}"
    );
}

#[test]
fn no_gate_reduces_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let result = levelk(&[
        "run",
        "--suite",
        "straight:2",
        "--no-gate",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains("eval_reduction_pct,0.00000000e0"), "{summary}");
}

#[test]
fn config_errors_exit_one() {
    // threshold count does not match the level count
    let out = levelk(&["run", "--suite", "straight:1", "--thresholds", "1,2", "--levels", "4"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));

    // unknown preset
    let out = levelk(&["run", "--preset", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown preset"));

    // clap-level usage error
    let out = levelk(&["run", "--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unreadable_suite_exits_two() {
    let out = levelk(&["run", "--suite", "/nonexistent/suite/dir"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(!stderr(&out).is_empty());

    let out = levelk(&["audit", "/nonexistent/mtp.json", "--threshold", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_mtp_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{").unwrap();
    let out = levelk(&["audit", path.to_str().unwrap(), "--threshold", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn audit_applies_the_gate_rule() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example_a_mtp(dir.path());
    let path = path.to_str().unwrap();

    // entropy 0.5 < 4.2: inactive
    let out = levelk(&["audit", path, "--threshold", "4.2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("agent,entropy,verdict"), "{text}");
    assert!(text.contains("0,5.00000000e-1,inactive"), "{text}");

    // entropy 0.5 >= 0.1: active
    let out = levelk(&["audit", path, "--threshold", "0.1"]);
    assert!(stdout(&out).contains("0,5.00000000e-1,active"));

    // single-mode agent has zero entropy: inactive at any positive threshold
    let single = dir.path().join("single.json");
    std::fs::write(
        &single,
        r#"{"version": 1, "dt": 0.5, "agents": [
            {"id": 7, "origin": [0.0, 0.0], "modes": [
              {"confidence": 1.0, "points": [[1.0, 0.0]]}
            ]}]}"#,
    )
    .unwrap();
    let out = levelk(&["audit", single.to_str().unwrap(), "--threshold", "0.001"]);
    assert!(stdout(&out).contains("7,0.00000000e0,inactive"));
}

#[test]
fn sweep_emits_one_row_per_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let result = levelk(&[
        "sweep",
        "--suite",
        "mixed:6",
        "--thresholds",
        "50,25",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let sweep = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let mut lines = sweep.lines();
    assert_eq!(lines.next().unwrap(), "thresholds,min_ade,miss_rate,eval_reduction_pct");
    assert_eq!(lines.count(), 6, "default grid has six schedules:\n{sweep}");

    // degenerate single-point grid
    let result = levelk(&[
        "sweep",
        "--suite",
        "mixed:6",
        "--thresholds",
        "50,25",
        "--grid",
        "40,20",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let sweep = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 2);
    assert!(sweep.lines().nth(1).unwrap().starts_with("40/20,"));

    // schedule length must match K
    let result = levelk(&[
        "sweep",
        "--suite",
        "mixed:6",
        "--thresholds",
        "50,25",
        "--grid",
        "40,20,10",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn entropy_profile_has_one_row_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let result = levelk(&[
        "entropy-profile",
        "--suite",
        "mixed:6",
        "--preset",
        "womd-open-loop",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let profile = std::fs::read_to_string(out_dir.join("entropy_profile.csv")).unwrap();
    let mut lines = profile.lines();
    assert_eq!(
        lines.next().unwrap(),
        "level,gated_mean,gated_std,ungated_mean,ungated_std"
    );
    // womd-open-loop has four thresholds: K = 5
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);

    // the contraction policy makes the ungated mean fall level over level
    let ungated_means: Vec<f64> = rows
        .iter()
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    for pair in ungated_means.windows(2) {
        assert!(pair[1] < pair[0], "means must decrease: {ungated_means:?}");
    }
}

#[test]
fn single_level_profile_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let result = levelk(&[
        "entropy-profile",
        "--suite",
        "straight:2",
        "--levels",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let profile = std::fs::read_to_string(out_dir.join("entropy_profile.csv")).unwrap();
    assert_eq!(profile.lines().count(), 2, "{profile}");
}

#[test]
fn lowering_the_first_threshold_never_raises_the_reduction() {
    // pin the second gate off so only the first gate varies
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let result = levelk(&[
        "sweep",
        "--suite",
        "mixed:10",
        "--thresholds",
        "50,25",
        "--grid",
        "80,-inf;40,-inf;10,-inf",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let sweep = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let reductions: Vec<f64> = sweep
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(reductions.len(), 3);
    assert!(
        reductions[0] >= reductions[1] && reductions[1] >= reductions[2],
        "reduction must not grow as the first threshold drops: {reductions:?}"
    );
}

#[test]
fn summary_reduction_matches_per_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let result = levelk(&[
        "run",
        "--suite",
        "mixed:8",
        "--thresholds",
        "50,25",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr(&result));

    // recompute the totals from one row per scene
    let levels = std::fs::read_to_string(out_dir.join("levels.csv")).unwrap();
    let mut seen = std::collections::BTreeMap::new();
    for line in levels.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let gated: u64 = fields[9].parse().unwrap();
        let ungated: u64 = fields[10].parse().unwrap();
        seen.insert(fields[0].to_string(), (gated, ungated));
    }
    let gated: u64 = seen.values().map(|v| v.0).sum();
    let ungated: u64 = seen.values().map(|v| v.1).sum();
    let expected = 100.0 * (1.0 - gated as f64 / ungated as f64);

    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let reported: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("eval_reduction_pct,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(
        (reported - expected).abs() < 1e-6,
        "summary says {reported}, rows say {expected}"
    );
}

#[test]
fn suite_can_come_from_scene_files() {
    let dir = tempfile::tempdir().unwrap();
    let scenes = dir.path().join("scenes");
    std::fs::create_dir_all(&scenes).unwrap();
    for (i, seed) in [3u64, 4].iter().enumerate() {
        let scene = levelk_core::gen_intersection(2, *seed, 20, 0.5).unwrap();
        levelk_core::save_scene(&scene, &scenes.join(format!("s{i}.json"))).unwrap();
    }

    let out_dir = dir.path().join("out");
    let result = levelk(&[
        "run",
        "--suite",
        scenes.to_str().unwrap(),
        "--thresholds",
        "50,25",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let levels = std::fs::read_to_string(out_dir.join("levels.csv")).unwrap();
    assert!(levels.lines().any(|l| l.starts_with("s0,")));
    assert!(levels.lines().any(|l| l.starts_with("s1,")));

    // a single scene file also works
    let single = scenes.join("s0.json");
    let result = levelk(&[
        "run",
        "--suite",
        single.to_str().unwrap(),
        "--thresholds",
        "50,25",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
}

#[test]
fn jobs_do_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let serial = dir.path().join("serial");
    let parallel = dir.path().join("parallel");
    for (out, jobs) in [(&serial, "1"), (&parallel, "4")] {
        let result = levelk(&[
            "run",
            "--suite",
            "mixed:8",
            "--seed",
            "5",
            "--jobs",
            jobs,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(result.status.success(), "{}", stderr(&result));
    }
    for name in ["levels.csv", "summary.csv"] {
        assert_eq!(
            std::fs::read(serial.join(name)).unwrap(),
            std::fs::read(parallel.join(name)).unwrap(),
            "{name} differs between --jobs 1 and --jobs 4"
        );
    }
}

#[test]
fn max_agents_caps_each_scene() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let result = levelk(&[
        "run",
        "--suite",
        "intersection:3",
        "--thresholds",
        "50,25",
        "--max-agents",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let levels = std::fs::read_to_string(out_dir.join("levels.csv")).unwrap();
    for line in levels.lines().skip(1) {
        let agent: u64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(agent < 2, "agent {agent} should have been dropped");
    }
}

#[test]
fn policy_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let policy = dir.path().join("policy.json");
    std::fs::write(&policy, r#"{"mode_count": 3, "contraction_rate": 0.7}"#).unwrap();

    let out_dir = dir.path().join("out");
    let result = levelk(&[
        "run",
        "--suite",
        "straight:2",
        "--thresholds",
        "50,25",
        "--policy",
        policy.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr(&result));

    // an invalid parameter file is a config error
    std::fs::write(&policy, r#"{"mode_count": 0}"#).unwrap();
    let result = levelk(&[
        "run",
        "--suite",
        "straight:2",
        "--policy",
        policy.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1), "{}", stderr(&result));
}
