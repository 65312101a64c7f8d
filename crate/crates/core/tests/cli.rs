use std::fs;
use std::process::Command;

use spheremax::harness::{run, write_outputs, ExperimentConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spheremax"))
}

#[test]
fn cli_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["monotone-lemma", "--svg", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("monotone-lemma: passed"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("monotone-lemma.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    assert_eq!(json["config_hash"].as_str().unwrap().len(), 64);
    assert!(dir.path().join("monotone-lemma.csv").exists());
}

#[test]
fn cli_svg_for_fitted_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["dsigma-decay", "--n", "2", "--svg", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let svg = fs::read_to_string(dir.path().join("dsigma-decay.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("slope"));
}

#[test]
fn cli_unknown_experiment_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["no-such-thing", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment"));
}

#[test]
fn cli_failed_check_exits_one() {
    // Ten shells cannot show growth by a factor of ten.
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["cex-divergence", "--j-min", "4", "--j-max", "14", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn cli_rejects_bad_arguments() {
    let out = bin().args(["region-table", "--epsilon", "0.7", "--out", "/nonexistent-unused"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_config_gives_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new("cov-identity");
    cfg.n = Some(1);
    cfg.seed = 7;
    let r1 = run(&cfg).unwrap();
    cfg.workers = Some(3);
    let r2 = run(&cfg).unwrap();
    assert_eq!(r1.config_hash, r2.config_hash);
    write_outputs(&r1, a.path(), false).unwrap();
    write_outputs(&r2, b.path(), false).unwrap();
    let ca = fs::read(a.path().join("cov-identity.csv")).unwrap();
    let cb = fs::read(b.path().join("cov-identity.csv")).unwrap();
    assert_eq!(ca, cb);

    cfg.seed = 8;
    assert_ne!(cfg.config_hash(), r1.config_hash);
}

#[test]
fn config_hash_ignores_output_options() {
    let mut a = ExperimentConfig::new("region-table");
    let h = a.config_hash();
    a.out = "elsewhere".into();
    a.svg = true;
    a.workers = Some(2);
    assert_eq!(a.config_hash(), h);
    a.epsilon = 0.2;
    assert_ne!(a.config_hash(), h);
}
