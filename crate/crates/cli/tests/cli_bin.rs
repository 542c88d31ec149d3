//! End-to-end smoke tests of the `nae-sdp` binary.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nae-sdp"))
}

#[test]
fn generate_then_refute_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "generate", "--c", "3", "--d", "5", "--n", "12", "--seed", "7", "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let instance = dir.path().join("instance.json");
    assert!(instance.exists());

    let out = bin()
        .args(["refute", "--iterations", "5", "--instance"])
        .arg(&instance)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let report = &doc["report"]["report"];
    assert!(report["eig_xor"].as_f64().unwrap() > 0.0);
    assert!(
        report["correction_value"].as_f64().unwrap() <= report["eig_xor"].as_f64().unwrap() + 1e-12
    );
    assert_eq!(doc["manifest"]["schema_version"], 1);
}

#[test]
fn cycles_exit_codes_and_manifest() {
    let out = bin()
        .args([
            "cycles",
            "--c",
            "3",
            "--d",
            "4",
            "--n",
            "80",
            "--trials",
            "20",
            "--gmax",
            "4",
            "--seed",
            "3",
            "--threads",
            "2",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["manifest"]["command"], "cycles");
    assert_eq!(doc["report"]["per_length"][2]["poisson_mean"], 18.0);
}

#[test]
fn witness_dump_and_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "witness",
            "--c",
            "3",
            "--d",
            "4",
            "--n",
            "40",
            "--trials",
            "2",
            "--rho",
            "-0.25",
            "--seed",
            "5",
            "--threads",
            "2",
            "--dump-coefficients",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("witness.json").exists());
    assert!(dir.path().join("coefficients.json").exists());

    let out = bin()
        .args([
            "sweep",
            "--d-list",
            "4",
            "--n",
            "30",
            "--trials",
            "2",
            "--seed",
            "5",
            "--threads",
            "2",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert!(csv.starts_with("d,f,rho_star,xor_bound,regime"));
    assert!(dir.path().join("sweep.csv").exists());
}

#[test]
fn bad_flags_exit_one() {
    let out = bin()
        .args([
            "refute", "--c", "4", "--d", "5", "--n", "10", "--trials", "2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1)); // NAE refutation needs c = 3
}
