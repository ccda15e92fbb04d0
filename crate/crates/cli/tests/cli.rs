//! End-to-end tests of the `driftweight` binary: flags, exit codes,
//! manifest gating, and byte-level determinism of outputs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_driftweight"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should start")
}

fn assert_code(out: &Output, want: i32) {
    let got = out.status.code().expect("no exit code");
    assert_eq!(
        got,
        want,
        "exit {got}, wanted {want}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// A fast config: 4-step stream, 40 samples/step, tiny nets.
const TINY: &str = r#"
[run]
out_dir = "out"
seed = 11
samples_per_step = 40
test_samples = 50
seeds = [0]

[schedule]
kind = "gaussian_walk"
horizon = 4
drift = 2.0
flip_period = 10

[omega]
epochs = 2
batch_size = 32

[model]
hidden = [8]
epochs = 2

[benchmark]
protocols = ["recent"]
svg = false
"#;

fn write_tiny(dir: &Path) {
    fs::write(dir.join("config.toml"), TINY).unwrap();
}

#[test]
fn help_and_version_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    assert_code(&run(&["--help"], tmp.path()), 0);
    assert_code(&run(&["--version"], tmp.path()), 0);
    assert_code(&run(&["gen", "--help"], tmp.path()), 0);
}

#[test]
fn unknown_flag_is_a_validation_failure() {
    let tmp = tempfile::tempdir().unwrap();
    assert_code(&run(&["gen", "--no-such-flag"], tmp.path()), 1);
    assert_code(&run(&["no-such-command"], tmp.path()), 1);
}

#[test]
fn missing_config_file_is_io_failure() {
    let tmp = tempfile::tempdir().unwrap();
    assert_code(&run(&["gen", "--config", "absent.toml"], tmp.path()), 2);
}

#[test]
fn invalid_config_fails_validation_before_any_write() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("config.toml"),
        "[schedule]\nkind = \"gaussian_walk\"\nhorizon = 0\n",
    )
    .unwrap();
    let out = run(
        &["gen", "--config", "config.toml", "--out", "out"],
        tmp.path(),
    );
    assert_code(&out, 1);
    assert!(!tmp.path().join("out").exists(), "no partial outputs");
}

#[test]
fn gen_is_deterministic_and_seed_sensitive() {
    let tmp = tempfile::tempdir().unwrap();
    write_tiny(tmp.path());
    assert_code(&run(&["gen", "--config", "config.toml"], tmp.path()), 0);
    let first = fs::read(tmp.path().join("out/stream_t0002.csv")).unwrap();
    assert!(tmp.path().join("out/manifest.toml").exists());

    // Re-running the same config overwrites with identical bytes.
    assert_code(&run(&["gen", "--config", "config.toml"], tmp.path()), 0);
    let second = fs::read(tmp.path().join("out/stream_t0002.csv")).unwrap();
    assert_eq!(first, second);

    // A different seed is a config mismatch: refused, then forced.
    let out = run(
        &["gen", "--config", "config.toml", "--seed", "12"],
        tmp.path(),
    );
    assert_code(&out, 1);
    assert_code(
        &run(
            &["gen", "--config", "config.toml", "--seed", "12", "--force"],
            tmp.path(),
        ),
        0,
    );
    let third = fs::read(tmp.path().join("out/stream_t0002.csv")).unwrap();
    assert_ne!(first, third);
}

#[test]
fn dry_run_prints_a_plan_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    write_tiny(tmp.path());
    let out = run(
        &["benchmark", "--config", "config.toml", "--dry-run"],
        tmp.path(),
    );
    assert_code(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("benchmark plan"), "stdout: {stdout}");
    assert!(stdout.contains("recent"));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn validate_without_estimator_snapshot_is_io_failure() {
    let tmp = tempfile::tempdir().unwrap();
    write_tiny(tmp.path());
    assert_code(&run(&["validate", "--config", "config.toml"], tmp.path()), 2);
}

#[test]
fn full_pipeline_produces_reports_and_charts() {
    let tmp = tempfile::tempdir().unwrap();
    write_tiny(tmp.path());
    let cfgarg = ["--config", "config.toml"];

    assert_code(&run(&[&["gen"], &cfgarg[..]].concat(), tmp.path()), 0);
    assert_code(&run(&[&["train-omega"], &cfgarg[..]].concat(), tmp.path()), 0);
    assert_code(&run(&[&["validate"], &cfgarg[..]].concat(), tmp.path()), 0);
    assert_code(&run(&[&["benchmark"], &cfgarg[..]].concat(), tmp.path()), 0);

    let out = tmp.path().join("out");
    assert!(out.join("omega_estimator.txt").exists());
    assert!(out.join("omega_report.csv").exists());
    let mmd = fs::read_to_string(out.join("mmd_report.csv")).unwrap();
    // Header plus horizon - 1 = 3 rows.
    assert_eq!(mmd.trim_end().lines().count(), 4);
    assert!(out.join("bench_seed_0000.csv").exists());
    assert!(out.join("bench_summary.csv").exists());

    // plot re-renders charts from the CSVs alone.
    assert_code(&run(&[&["plot"], &cfgarg[..]].concat(), tmp.path()), 0);
    assert!(out.join("bench.svg").exists());
    assert!(out.join("mmd.svg").exists());
}

#[test]
fn out_and_jobs_flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    write_tiny(tmp.path());
    let out = run(
        &[
            "gen",
            "--config",
            "config.toml",
            "--out",
            "elsewhere",
            "--jobs",
            "2",
        ],
        tmp.path(),
    );
    assert_code(&out, 0);
    assert!(tmp.path().join("elsewhere/stream_t0000.csv").exists());
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn defaults_run_without_a_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    // No config.toml anywhere; built-in defaults drive a dry-run plan.
    let out = run(&["rl", "--dry-run"], tmp.path());
    assert_code(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("rl plan"), "stdout: {stdout}");
    assert!(stdout.contains("period 20"));
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn rl_baseline_only_smoke() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"
[run]
out_dir = "out"
seeds = [3]

[rl]
episodes = 8
burn_in = 3
batch_size = 16
updates_per_episode = 1
epsilon_decay_episodes = 4
refresh_every = 2
refresh_epochs = 1
omega_batch = 32
svg = false
"#;
    fs::write(tmp.path().join("config.toml"), cfg).unwrap();
    assert_code(
        &run(
            &["rl", "--config", "config.toml", "--baseline-only"],
            tmp.path(),
        ),
        0,
    );
    let curve = tmp.path().join("out/rl_unweighted_seed_0003.csv");
    assert!(curve.exists());
    assert!(!tmp.path().join("out/rl_weighted_seed_0003.csv").exists());
    let text = fs::read_to_string(curve).unwrap();
    assert_eq!(text.lines().count(), 9); // header + 8 episodes
}
