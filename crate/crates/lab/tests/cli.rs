use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riesz-swarm"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "0")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn shape_then_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = dir.path().join("sphere.csv");
    let out = cli(&[
        "shape",
        "--kind",
        "sphere",
        "--dim",
        "3",
        "--particles",
        "150",
        "--output",
        path(&cloud),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&cloud).unwrap();
    assert!(text.starts_with("x1,x2,x3,w\n"));
    assert_eq!(text.lines().count(), 151);

    let out = cli(&["equilibrium", "--input", path(&cloud), "--lambda", "1"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["weights"].as_array().unwrap().len(), 150);
    assert!(v["capacity"].as_f64().unwrap() < 1.0);
}

#[test]
fn simulate_writes_measure_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let fin = dir.path().join("final.json");
    let traj = dir.path().join("traj.csv");
    let out = cli(&[
        "simulate",
        "--alpha",
        "2",
        "--lambda",
        "1",
        "--particles",
        "12",
        "--tol",
        "1e-4",
        "--every",
        "50",
        "--trajectory",
        path(&traj),
        "--output",
        path(&fin),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&fin).unwrap()).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 12);
    let traj = std::fs::read_to_string(&traj).unwrap();
    assert!(traj.starts_with("step,t,particle,x1,x2\n0,0,0,"));
    assert_eq!((traj.lines().count() - 1) % 12, 0);
}

#[test]
fn unconverged_simulation_is_inconclusive() {
    let out = cli(&["simulate", "--particles", "12", "--max-steps", "3"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn report_subcommands_and_exit_codes() {
    let out = cli(&["recovery-check", "--lambda", "1", "--particles", "60"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["name"], "recovery-check");
    assert_eq!(v["timestamp"], "1970-01-01T00:00:00Z");
    assert!(v["params"]["threads"].is_number());

    let out = cli(&["recovery-check", "--format", "csv", "--particles", "60"]);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("# recovery\nalpha,beta,"));

    // one solver iteration leaves the KKT verdict failing
    let out = cli(&[
        "frostman-check",
        "--dim",
        "3",
        "--particles",
        "200",
        "--max-steps",
        "1",
        "--restarts",
        "0",
        "--probes",
        "5",
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn bad_usage_is_an_error_not_a_verdict() {
    assert_eq!(cli(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        cli(&["capacity-table", "--dims", "2", "--lambda", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
    let out = cli(&["symmetry-break", "--pairs", "4by4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("4by4"));
}
