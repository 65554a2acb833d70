use std::path::Path;
use std::process::Command as Process;

use serde_json::Value;
use zvonkin_core::io::read_field;
use zvonkin_lab::run::file_sha256;
use zvonkin_lab::{execute, Command, RunConfig, Which};

const BIN: &str = env!("CARGO_BIN_EXE_zvonkin-lab");

fn tiny(root: &Path) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.grid.n = 32;
    cfg.grid.steps = 64;
    cfg.sde.paths = 300;
    cfg.analysis.n_list = vec![4, 16];
    cfg.analysis.smooth_n = 16;
    cfg.analysis.probes = 100;
    cfg.analysis.corpus_pairs = 4;
    cfg.output = root.join("runs");
    cfg
}

fn manifest(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn rough_beta_is_rejected_with_the_assumption_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = Process::new(BIN).args(["solve", "--drift.beta", "0.6"]).current_dir(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("0 < beta < 1/2"), "{err}");
    assert!(!dir.path().join("runs").exists());
}

#[test]
fn zero_drift_solve_selects_unit_lambda_and_zero_map() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny(dir.path());
    cfg.drift.sigma = 0.0;
    let out = execute(Command::Solve, &cfg).unwrap();
    assert!(out.report.all_passed());
    let m = manifest(&out.manifest);
    assert_eq!(m["telemetry"]["lambda"], 1.0);
    let (u, header) = read_field(&out.dir.join("u_b.fld")).unwrap();
    assert_eq!(header.meta["lambda"], 1.0);
    assert_eq!(u.sup_norm(), 0.0);
}

#[test]
fn manifest_hashes_match_the_written_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = execute(Command::Simulate, &tiny(dir.path())).unwrap();
    let m = manifest(&out.manifest);
    let outputs = m["outputs"].as_array().unwrap();
    let names: Vec<&str> = outputs.iter().map(|o| o["file"].as_str().unwrap()).collect();
    for expected in ["zvonkin.ens", "direct_b_n4.ens", "direct_b_n16.ens", "marginal_T.csv", "report.json"] {
        assert!(names.contains(&expected), "{expected} missing from {names:?}");
    }
    for o in outputs {
        let (bytes, sha) = file_sha256(&out.dir.join(o["file"].as_str().unwrap())).unwrap();
        assert_eq!(o["bytes"], bytes);
        assert_eq!(o["sha256"], sha);
    }
    assert_eq!(m["seeds"]["paths"], 1);
}

#[test]
fn constant_test_function_residual_is_exactly_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = execute(Command::Verify(Which::Fp), &tiny(dir.path())).unwrap();
    let mass = out.report.checks.iter().find(|c| c.id == "fp-mass").unwrap();
    assert_eq!(mass.value, 0.0);
    assert!(mass.passed());
}

#[test]
fn reruns_land_in_the_same_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(dir.path());
    let a = execute(Command::SynthDrift, &cfg).unwrap();
    let bytes = std::fs::read(a.dir.join("drift.fld")).unwrap();
    let b = execute(Command::SynthDrift, &cfg).unwrap();
    assert_eq!(a.dir, b.dir);
    assert_eq!(bytes, std::fs::read(b.dir.join("drift.fld")).unwrap());
    let other = execute(Command::Solve, &cfg).unwrap();
    assert_ne!(a.dir, other.dir);
}

#[test]
fn failed_verdicts_give_exit_one_and_their_ids() {
    // with no drift every ladder member is the same process, so the
    // distances cannot fall below the noise floor
    let dir = tempfile::tempdir().unwrap();
    let out = Process::new(BIN)
        .args(["converge", "--drift.sigma", "0", "--grid.N", "32", "--grid.K", "64", "--sde.M", "300"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("convergence"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("manifest:"));
}

#[test]
fn overrides_apply_on_top_of_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, r#"{"grid": {"N": 32, "K": 64}, "drift": {"seed": 5}}"#).unwrap();
    let out = Process::new(BIN)
        .args(["synth-drift", "--config"])
        .arg(&path)
        .args(["--drift.seed=6", "--grid.N", "64"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let manifest_path = stdout.lines().find_map(|l| l.strip_prefix("manifest: ")).unwrap();
    let m = manifest(&dir.path().join(manifest_path));
    assert_eq!(m["config"]["drift"]["seed"], 6);
    assert_eq!(m["config"]["grid"]["n"], 64);
    assert_eq!(m["config"]["grid"]["steps"], 64);
}
