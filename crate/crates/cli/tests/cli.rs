//! End-to-end checks of the `spinbath` binary: subcommands, exit codes,
//! and byte-identical sweep output across parallelism degrees.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinbath"))
}

#[test]
fn trajectory_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = bin()
        .args(["trajectory", "--set", "n=60", "--tfin", "5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,a,c,Re_b,Im_b,E_LS,gamma1,gamma2,gamma3,mu,flags\n"));
    assert_eq!(csv.lines().count(), 102); // header + 101 samples
    let summary = std::fs::read_to_string(out.join("summary.json")).unwrap();
    for key in ["N_BLP", "N_degree", "convergence_report", "echo_horizon", "engine"] {
        assert!(summary.contains(key), "summary missing {key}");
    }
}

#[test]
fn phase_diagram_is_deterministic_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &Path, jobs: &str| {
        let status = bin()
            .args([
                "phase-diagram",
                "--set",
                "delta_h_grid=-2.2:-1.8:3",
                "--set",
                "omega_grid=0.3:0.5:2",
                "--set",
                "n=80",
                "--tfin",
                "10",
                "--jobs",
                jobs,
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out.join("phase_diagram.csv")).unwrap()
    };
    let a = run(&dir.path().join("a"), "1");
    let b = run(&dir.path().join("b"), "4");
    assert_eq!(a, b, "sweep output depends on the parallelism degree");
}

#[test]
fn exit_codes_follow_the_contract() {
    // Unknown key -> configuration error (2).
    let out = bin().args(["trajectory", "--set", "coupling=1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Sector engine with a thermal environment -> capability refusal (3).
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["trajectory", "--set", "n=40", "--set", "env=thermal", "--set", "engine=sector", "--out"])
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    // Dense engine above its size cap -> capability refusal (3).
    let out = bin()
        .args(["trajectory", "--set", "n=16", "--set", "env=thermal", "--set", "engine=dense", "--out"])
        .arg(dir.path().join("y"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn correlations_reports_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("corr");
    let status = bin()
        .args([
            "correlations",
            "--set",
            "n=41",
            "--set",
            "env=thermal",
            "--set",
            "beta=0.1",
            "--tfin",
            "4",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let json = std::fs::read_to_string(out.join("correlations.json")).unwrap();
    for key in ["tau_c", "sum_rule_defect", "no_decay", "slow_decay", "provenance"] {
        assert!(json.contains(key), "correlations summary missing {key}");
    }
}
