//! End-to-end tests of the `skinet` binary: subcommands, report formats and
//! exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn skinet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skinet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn model(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name);
    path.to_str().unwrap().to_string()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn check_all_on_spot_reports_failures() {
    let out = skinet(&["check", &model("spot.skillset"), "--all"]);
    assert_eq!(exit_code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("check dead"));
    assert!(text.contains("A ¬dead"));
    assert!(text.contains("check live"));
    assert!(text.contains("t_go_to_success_is_arrived_1"));
    assert!(text.contains("deadskill(go_to)"));
    assert!(text.contains("check deadset"));
    assert!(text.contains("AG EF"));
}

#[test]
fn passing_checks_exit_zero() {
    let out = skinet(&[
        "check",
        &model("spot_fixed.skillset"),
        "--dead",
        "--safe",
        "--deadskill",
        "--deadset",
    ]);
    assert_eq!(
        exit_code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("verdict: pass"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn single_check_flag_runs_only_that_check() {
    let out = skinet(&["check", &model("spot.skillset"), "--dead"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("check dead"));
    assert!(!text.contains("check live"));
}

#[test]
fn deadskill_accepts_a_skill_name() {
    let out = skinet(&["check", &model("spot.skillset"), "--deadskill", "go_to"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stdout(&out).contains("deadskill(go_to)"));

    let out = skinet(&["check", &model("spot.skillset"), "--deadskill", "ghost"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown skill"));
}

#[test]
fn json_format_is_machine_readable() {
    let out = skinet(&[
        "check",
        &model("spot.skillset"),
        "--all",
        "--format",
        "json",
    ]);
    assert_eq!(exit_code(&out), 1);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(value["skillset"], "spot");
    assert_eq!(value["tool"]["name"], "skinet");
    let checks = value["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .any(|c| c["name"] == "dead" && c["verdict"] == "pass"));
    assert!(checks
        .iter()
        .any(|c| c["name"] == "live" && c["verdict"] == "fail"));
}

#[test]
fn export_writes_a_tina_net() {
    let dir = std::env::temp_dir().join("skinet-cli-test-export");
    std::fs::create_dir_all(&dir).unwrap();
    let net_path = dir.join("spot.net");
    let out = skinet(&[
        "export",
        &model("spot.skillset"),
        "--net",
        net_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let contents = std::fs::read_to_string(&net_path).unwrap();
    assert!(contents.starts_with("net {spot}\n"));
    assert!(contents.contains("tr {t_start_go_to}"));
    assert!(contents.contains("pl {power_status_PowerOff} (1)"));
    assert!(contents.contains("pr {"));
}

#[test]
fn export_to_stdout_by_default() {
    let out = skinet(&["export", &model("spot.skillset"), "--bare-state-names"]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("tr {t_start_go_to} {AutoMode} {Idle} {PowerOn} {e_go_to}"));
}

#[test]
fn graph_dumps_dot() {
    let out = skinet(&["graph", &model("spot.skillset")]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("digraph reachability {"));
    assert!(text.contains("t_start_init_power"));
}

#[test]
fn oracle_subcommand_passes_on_spot() {
    let out = skinet(&["oracle", &model("spot.skillset")]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("equivalent"));

    let out = skinet(&[
        "oracle",
        &model("spot.skillset"),
        "--no-exit-places",
        "--format",
        "json",
    ]);
    assert_eq!(exit_code(&out), 0);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["equivalent"], true);
}

#[test]
fn oracle_flag_joins_the_check_report() {
    let out = skinet(&["check", &model("spot.skillset"), "--dead", "--oracle"]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("check oracle"));
}

#[test]
fn syntax_error_exits_two() {
    let dir = std::env::temp_dir().join("skinet-cli-test-bad");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.skillset");
    std::fs::write(&bad, "skillset broken {").unwrap();
    let out = skinet(&["check", bad.to_str().unwrap(), "--all"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
}

#[test]
fn validation_error_exits_two() {
    let dir = std::env::temp_dir().join("skinet-cli-test-invalid");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("invalid.skillset");
    std::fs::write(
        &bad,
        "skillset x { resource { power { initial Off Off -> On } } \
          event { e { power -> Half } } }",
    )
    .unwrap();
    let out = skinet(&["check", bad.to_str().unwrap(), "--all"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Half"));
}

#[test]
fn missing_file_exits_two() {
    let out = skinet(&["check", "/nonexistent/ghost.skillset", "--all"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn state_limit_exits_three() {
    let out = skinet(&["check", &model("spot.skillset"), "--all", "--limit", "3"]);
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("state limit"));
}

#[test]
fn report_file_and_stdout_json_are_identical() {
    let dir = std::env::temp_dir().join("skinet-cli-test-report");
    std::fs::create_dir_all(&dir).unwrap();
    let report_path = dir.join("report.json");
    let out = skinet(&[
        "check",
        &model("spot.skillset"),
        "--all",
        "--format",
        "json",
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 1);
    let file_contents = std::fs::read_to_string(&report_path).unwrap();
    assert_eq!(file_contents, stdout(&out));
}

#[test]
fn repeated_runs_emit_identical_outputs() {
    let a = skinet(&[
        "check",
        &model("spot.skillset"),
        "--all",
        "--format",
        "json",
    ]);
    let b = skinet(&[
        "check",
        &model("spot.skillset"),
        "--all",
        "--format",
        "json",
    ]);
    assert_eq!(stdout(&a), stdout(&b));
    let a = skinet(&["export", &model("spot.skillset")]);
    let b = skinet(&["export", &model("spot.skillset")]);
    assert_eq!(stdout(&a), stdout(&b));
}
