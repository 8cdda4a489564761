use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_stablab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("LAB_SEED").output().unwrap()
}

fn small_arcsine(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("small.json");
    let cfg = r#"{
        "system": {"kind": "heavy_symmetric", "alpha": 0.75},
        "observable": {"kind": "symbol", "scale": 1},
        "n": 2000,
        "replicates": 200,
        "seed": 7
    }"#;
    std::fs::write(&path, cfg).unwrap();
    path
}

fn arcsine_into(cfg: &Path, out: &Path, extra: &[&str]) -> Vec<u8> {
    let mut args = vec!["arcsine", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend(extra);
    let o = run(&args);
    assert!(matches!(o.status.code(), Some(0 | 2)), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(out.join("arcsine-7.json")).unwrap()
}

#[test]
fn reports_are_byte_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_arcsine(dir.path());
    let a = arcsine_into(&cfg, &dir.path().join("a"), &["--workers", "1"]);
    let b = arcsine_into(&cfg, &dir.path().join("b"), &["--workers", "1"]);
    let c = arcsine_into(&cfg, &dir.path().join("c"), &["--workers", "3"]);
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert!(dir.path().join("a/arcsine-7.timing.json").exists());
    assert!(dir.path().join("a/arcsine-7.csv").exists());
}

#[test]
fn a_report_reruns_to_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_arcsine(dir.path());
    let first = arcsine_into(&cfg, &dir.path().join("a"), &[]);
    let again = arcsine_into(&dir.path().join("a/arcsine-7.json"), &dir.path().join("b"), &[]);
    assert_eq!(first, again);
}

#[test]
fn seed_override_changes_the_stem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_arcsine(dir.path());
    let o = run(&["arcsine", "--config", cfg.to_str().unwrap(), "--seed", "9", "--out", dir.path().to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(0 | 2)));
    assert!(dir.path().join("arcsine-9.json").exists());
}

#[test]
fn missing_config_is_a_usage_error() {
    let o = run(&["marginal"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("--config"), "{err}");
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn malformed_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"system": {"kind": "dyadic"}, "n": 0}"#).unwrap();
    let o = run(&["marginal", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(&["nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn selftest_runs_without_a_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["selftest", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("PASS selftest"), "{stdout}");
    assert!(dir.path().join("selftest-0.json").exists());
}
