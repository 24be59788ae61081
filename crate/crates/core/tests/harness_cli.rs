use std::path::Path;
use std::process::{Command, Output};

use aca_ode::harness::{validate_results, Manifest, CSV_COLUMNS};

fn harness(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aca-harness"))
        .args(args)
        .output()
        .unwrap()
}

fn manifest(dir: &Path, name: &str) -> Manifest {
    serde_json::from_str(
        &std::fs::read_to_string(dir.join(format!("{name}.manifest.json"))).unwrap(),
    )
    .unwrap()
}

#[test]
fn convergence_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = harness(&["convergence", "--out", dir.path().to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1);
    let m: Manifest = serde_json::from_str(stdout.trim()).unwrap();
    assert!(m.passed);
    assert_eq!(m.experiment, "convergence");

    let csv = dir.path().join("convergence.csv");
    let header = std::fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(header, CSV_COLUMNS.join(","));
    assert_eq!(validate_results(&csv).unwrap(), m.rows);
}

#[test]
fn flags_override_and_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = harness(&[
        "toy-gradient",
        "--out",
        d,
        "--method",
        "aca,naive",
        "--rtol",
        "1e-8",
        "--atol",
        "1e-8",
        "--seed",
        "4",
        "--set",
        "horizons=1,2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m = manifest(dir.path(), "toy-gradient");
    assert_eq!(m.seed, 4);
    assert_eq!(m.rows, 4);
    assert_eq!(m.config["rtol"], "1e-8");
    assert_eq!(m.config["methods"], "aca,naive");
}

#[test]
fn failing_checks_give_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let out = harness(&[
        "convergence",
        "--out",
        dir.path().to_str().unwrap(),
        "--tableau",
        "euler",
        "--set",
        "slope_tolerance=0.001",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!manifest(dir.path(), "convergence").passed);
}

#[test]
fn manifest_replays_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    assert!(harness(&[
        "gradcheck",
        "--out",
        first.to_str().unwrap(),
        "--set",
        "problems=linear",
        "--set",
        "probes=5"
    ])
    .status
    .success());
    let cfg = first.join("gradcheck.manifest.json");
    assert!(harness(&[
        "gradcheck",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        second.to_str().unwrap()
    ])
    .status
    .success());
    let a = std::fs::read_to_string(first.join("gradcheck.csv")).unwrap();
    let b = std::fs::read_to_string(second.join("gradcheck.csv")).unwrap();
    let strip = |s: &str| {
        s.lines()
            .map(|l| l.rsplitn(3, ',').nth(2).unwrap().to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn bad_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(
        harness(&["toy-gradient", "--out", d, "--set", "nonsense=1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        harness(&["toy-gradient", "--out", d, "--method", "euler"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        harness(&["convergence", "--out", d, "--tableau", "rk7"])
            .status
            .code(),
        Some(2)
    );

    let bogus = dir.path().join("bogus.csv");
    std::fs::write(&bogus, "a,b\n1,2\n").unwrap();
    assert_eq!(
        harness(&["validate", bogus.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}
