use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn flows(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flows"))
        .current_dir(root())
        .args(args)
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn solved_run_exits_zero_and_prints_the_program() {
    let dir = tempfile::tempdir().unwrap();
    let out = flows(&["run", "fixtures/dataset/cf-1001.json", "--variant", "Code", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("print(a + b)"), "{stdout}");
    assert!(stdout.contains("verdict: AllPassed"));
    assert!(dir.path().join("cf-1001/Code/trace.log").is_file());
}

#[test]
fn unsolved_run_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = flows(&["run", "fixtures/dataset/lc-0006.json", "--variant", "Code", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", text(&out.stdout));
}

#[test]
fn misspelled_variant_suggests_the_closest_name() {
    let out = flows(&["run", "fixtures/dataset/cf-1001.json", "--variant", "Cod"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("did you mean `Code`?"), "{}", text(&out.stderr));
}

#[test]
fn missing_interpreter_is_an_environment_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = flows(&[
        "run",
        "fixtures/dataset/cf-1001.json",
        "--out",
        dir.path().to_str().unwrap(),
        "--python",
        "/nonexistent/python",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", text(&out.stderr));
}

#[test]
fn unknown_profile_and_bad_flags_are_usage_errors() {
    let out = flows(&["run", "fixtures/dataset/cf-1001.json", "--backend-profile", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("known: remote, scripted"), "{}", text(&out.stderr));
    let out = flows(&["eval", "--dataset", "fixtures/dataset", "--workers", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = flows(&["eval", "--dataset", "fixtures/dataset", "--variants", "Code_Debug"]);
    assert_eq!(out.status.code(), Some(2));
    let out = flows(&["eval", "--dataset", "fixtures/dataset", "--workers", "2", "--interactive-plan"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn remote_profile_without_credential_is_an_environment_failure() {
    let out = Command::new(env!("CARGO_BIN_EXE_flows"))
        .current_dir(root())
        .env_remove("OPENAI_API_KEY")
        .args(["run", "fixtures/dataset/cf-1001.json", "--backend-profile", "remote"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", text(&out.stderr));
    assert!(text(&out.stderr).contains("OPENAI_API_KEY"));
}

#[test]
fn recorded_run_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().to_str().unwrap();
    let out = flows(&["run", "fixtures/dataset/cf-1002.json", "--variant", "Code_Debug_Collab", "--out", run_dir]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let trace = dir.path().join("cf-1002/Code_Debug_Collab/trace.log");
    let out = flows(&["replay", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(text(&out.stdout).trim(), "identical");
}

#[test]
fn replay_with_another_config_reports_the_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().to_str().unwrap();
    flows(&["run", "fixtures/dataset/cf-1001.json", "--variant", "Code", "--out", run_dir]);
    let trace = dir.path().join("cf-1001/Code/trace.log");
    let events = flows_core::trace::read_trace(&trace).unwrap();
    let mut config = flows_core::FlowConfig::from_value(&events[0].body["config"]).unwrap();
    config.name = "Renamed".into();
    let path = dir.path().join("config.json");
    std::fs::write(&path, serde_json::to_string(&config).unwrap()).unwrap();
    let out = flows(&["replay", trace.to_str().unwrap(), "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("diverged"), "{}", text(&out.stderr));
}

#[test]
fn cache_clear_then_stats_shows_nothing() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("deadbeef"), "x").unwrap();
    let cache = dir.path().to_str().unwrap();
    let out = flows(&["cache", "clear", "--dir", cache]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let out = flows(&["cache", "stats", "--dir", cache]);
    assert!(text(&out.stdout).contains("entries: 0"), "{}", text(&out.stdout));
}
