use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const CONFIG: &str = r#"{
  "d": 3,
  "rounds_test": 20,
  "schedule": { "gamma0": 0.02 },
  "n_train": [300, 3000],
  "window": [100, 400],
  "repetitions": 3,
  "trials": 200,
  "eval_start": 1000,
  "eval_end": 1400,
  "eval_step": 200,
  "seed": 11
}"#;

fn adaqec(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adaqec")).args(args).current_dir(dir).output().expect("binary runs")
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), CONFIG).unwrap();
    dir
}

#[test]
fn simulate_writes_a_syndrome_file() {
    let dir = setup();
    let out = adaqec(&["simulate", "--config", "c.json", "--out", "s.txt"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("s.txt")).unwrap();
    assert!(text.starts_with("# syndrome d=3 rounds=20"));
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn simulate_estimate_decode_round_trip() {
    let dir = setup();
    let run = |args: &[&str]| {
        let out = adaqec(args, dir.path());
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out
    };
    run(&["simulate", "--config", "c.json", "--rounds", "5000", "--out", "train.txt"]);
    run(&["estimate", "--config", "c.json", "--input", "train.txt", "--window", "4000", "--out", "e.json"]);
    let est = fs::read_to_string(dir.path().join("e.json")).unwrap();
    assert!(est.contains("\"classes\""));
    run(&["simulate", "--config", "c.json", "--seed", "5", "--out", "test.txt"]);
    for backend in ["exact", "dijkstra"] {
        let out = run(&["decode", "--config", "c.json", "--input", "test.txt", "--estimates", "e.json", "--backend", backend]);
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("\ntotal ") || text.starts_with("total "), "{text}");
        assert!(text.lines().any(|l| l.starts_with("success ")));
    }
    let dem = run(&["dump-dem", "--config", "c.json", "--estimates", "e.json", "--rounds", "2"]);
    assert!(String::from_utf8(dem.stdout).unwrap().starts_with("# dem d=3 rounds=2 lag=1"));
}

#[test]
fn convergence_csv_is_reproducible() {
    let dir = setup();
    let args = ["exp-convergence", "--config", "c.json", "--repetitions", "2", "--out", "a.csv"];
    assert_eq!(adaqec(&args, dir.path()).status.code(), Some(0));
    let first = fs::read(dir.path().join("a.csv")).unwrap();
    assert!(first.starts_with(b"N,delta_mean,delta_stderr,alpha_fit\n"));
    assert_eq!(adaqec(&args, dir.path()).status.code(), Some(0));
    assert_eq!(first, fs::read(dir.path().join("a.csv")).unwrap());
    let other = adaqec(&["exp-convergence", "--config", "c.json", "--repetitions", "2", "--seed", "12"], dir.path());
    assert_ne!(first, other.stdout);
}

#[test]
fn fluctuation_csv_has_one_column_per_window() {
    let dir = setup();
    let out = adaqec(&["exp-fluctuation", "--config", "c.json", "--repetitions", "1", "--window", "100,200,400"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,eps_w100,eps_w200,eps_w400,eps_oracle\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn usage_errors_exit_one_with_schema() {
    let dir = setup();
    for args in [&["simulate"][..], &["simulate", "--config", "missing.json"], &["frobnicate"], &["decode", "--config", "c.json", "--input", "x", "--backend", "fast"]] {
        let out = adaqec(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("\"schedule\""));
    }
    fs::write(dir.path().join("bad.json"), r#"{"d": 4, "schedule": {"gamma0": 0.01}}"#).unwrap();
    assert_eq!(adaqec(&["simulate", "--config", "bad.json"], dir.path()).status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_two() {
    let dir = setup();
    assert_eq!(adaqec(&["decode", "--config", "c.json", "--input", "nothing.txt"], dir.path()).status.code(), Some(2));
    fs::write(dir.path().join("junk.txt"), "not a syndrome\n").unwrap();
    assert_eq!(adaqec(&["estimate", "--config", "c.json", "--input", "junk.txt"], dir.path()).status.code(), Some(2));
}
