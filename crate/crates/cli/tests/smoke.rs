//! End-to-end runs of the `npc` binary on the shipped scenarios.

use std::path::PathBuf;
use std::process::Command;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn npc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_npc"))
}

#[test]
fn run_writes_reports_and_exits_zero() {
    let out = tempdir("npc-run");
    let status = npc()
        .args(["run", "--scenario"])
        .arg(scenario("path_hopflax.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .expect("binary runs");
    assert!(status.success());
    for file in ["reports.json", "reports.csv", "solution.json", "graph.json", "time_sweep.csv"] {
        assert!(out.join(file).exists(), "{file} missing");
    }
    let reports: Vec<npc_core::CheckReport> =
        serde_json::from_str(&std::fs::read_to_string(out.join("reports.json")).unwrap()).unwrap();
    assert!(!reports.is_empty());
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn single_check_subcommand() {
    let output = npc()
        .args(["check", "max_principle", "--scenario"])
        .arg(scenario("path_hopflax.json"))
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let report: npc_core::CheckReport = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report.name, "max_principle");
    assert!(report.pass);
}

#[test]
fn report_csv_format() {
    let output = npc()
        .args(["report", "--format", "csv", "--scenario"])
        .arg(scenario("path_hopflax.json"))
        .output()
        .expect("binary runs");
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.starts_with("name,pass,max_violation,tolerance,witness_count,notes"));
}

#[test]
fn thread_cap_is_respected() {
    let output = npc()
        .env("NPC_THREADS", "1")
        .args(["check", "heat_symmetry", "--scenario"])
        .arg(scenario("path_hopflax.json"))
        .output()
        .expect("binary runs");
    assert!(output.status.success());
}

fn tempdir(prefix: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("{prefix}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
