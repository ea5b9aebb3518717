use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn transhop(args: &[&str], config: Option<&str>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_transhop"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(text) = config {
        let path = out.with_extension("toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap_or_default().to_string()
}

#[test]
fn analytic_self_test_passes_and_writes_schemas() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let o = transhop(&["analytic", "--self-test"], None, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("PASS table alpha=0.02"));
    assert_eq!(first_line(&out.join("analytic/table.csv")), transhop::export::TABLE_HEADER);
    assert_eq!(first_line(&out.join("analytic/curves.csv")), transhop::export::CURVE_HEADER);
    let table = fs::read_to_string(out.join("analytic/table.csv")).unwrap();
    assert_eq!(table.lines().count(), 8);
    let checks: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("self_test.json")).unwrap()).unwrap();
    assert!(checks.as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn single_alpha_gives_single_row() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let o = transhop(&["analytic"], Some("[analytic]\ntable_alphas = [0.05]\ncurve_alphas = []"), &out);
    assert!(o.status.success());
    let table = fs::read_to_string(out.join("analytic/table.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    assert_eq!(transhop(&["analytic"], Some("[road]\nlanes = 3"), &out).status.code(), Some(2));
    assert_eq!(transhop(&["analytic"], Some("[comms]\nrange_m = -5"), &out).status.code(), Some(2));
    assert_eq!(transhop(&["analytic"], Some("not toml ="), &out).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_transhop"))
        .args(["oracle", "--config", "/nonexistent/file.toml"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn collisions_exit_with_3() {
    let dir = TempDir::new().unwrap();
    let config = "seed = 3\n[road]\ntime_step_s = 3\nlength_km = 5\n[idm]\ncomfort_decel = 0.5\nmax_accel = 3\n\
                  [comms]\nlandmark_km = 2.5\n[validate]\nalpha_sweep = [0.05]\nlane_sweep = []\n\
                  inflow_per_h_per_lane = 2400\nmessages = 10\nmax_duration_h = 0.5\n";
    let o = transhop(&["validate"], Some(config), &dir.path().join("run"));
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("collision"));
}

#[test]
fn oracle_report_is_byte_reproducible() {
    let dir = TempDir::new().unwrap();
    let config = "[oracle]\nsamples = 5000";
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = transhop(&["oracle", "--seed", seed], Some(config), &out);
        assert!(o.status.success());
        fs::read(out.join("oracle/report.json")).unwrap()
    };
    let a = run("a", "9");
    assert_eq!(a, run("b", "9"));
    assert_ne!(a, run("c", "10"));
}

#[test]
fn oracle_flags_missing_receivers() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let o = transhop(&["oracle", "--self-test"], Some("[oracle]\nsamples = 100\nrho1_per_km = 0"), &out);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("oracle/report.json")).unwrap()).unwrap();
    for cell in report["cells"].as_array().unwrap() {
        assert_eq!(cell["status"], "undeliverable");
        assert!(cell["tau3"].is_null());
    }
}

const SHORT_JAM: &str = "[jam]\nduration_min = 25\nfall_start_min = 15\nfall_end_min = 20\nprobe_window_min = [0, 25]\n";

#[test]
fn jam_without_equipped_vehicles_is_clean() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let o = transhop(&["jam"], Some(&format!("{SHORT_JAM}alpha = 0.0\n")), &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("jam/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["messages_created"], 0);
    assert_eq!(fs::read_to_string(out.join("jam/events.csv")).unwrap().lines().count(), 1);
    assert_eq!(first_line(&out.join("jam/trajectories.csv")), transhop::export::TRAJECTORY_HEADER);
    assert_eq!(first_line(&out.join("jam/records.csv")), transhop::export::RECORD_HEADER);
    assert_eq!(first_line(&out.join("jam/detectors.csv")), transhop::export::DETECTOR_HEADER);
    assert_eq!(first_line(&out.join("jam/speed_field.csv")), transhop::export::FIELD_HEADER);
}

#[test]
fn failed_self_test_exits_with_4() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    // no bottleneck, no breakdown
    let o = transhop(&["jam", "--self-test"], Some(&format!("{SHORT_JAM}bottleneck_strength = 0.0\n")), &out);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL breakdown"));
}
