use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_tandem-lab"))
        .arg("--config")
        .arg(&cfg)
        .args(extra)
        .current_dir(dir)
        .output()
        .unwrap()
}

#[test]
fn discrete_equivalence_reports_zero_difference() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "experiment = discrete-equiv\nseed = 1\n",
        &["--out", "eq.csv"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("eq.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# "));
    assert_eq!(lines.next().unwrap(), "quantity,value");
    assert!(csv.lines().any(|l| l == "max_abs_diff,0"));
    assert!(csv.lines().any(|l| l == "users,200"));
}

#[test]
fn attract_writes_one_row_per_level_and_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "experiment = attract\nlevels = 4, 16, 64\nreps = 16\nout = a.csv\n";
    let one = run(dir.path(), cfg, &["--threads", "1", "--out", "one.csv"]);
    let four = run(dir.path(), cfg, &["--threads", "4", "--out", "four.csv"]);
    assert!(one.status.success() && four.status.success());
    let a = fs::read(dir.path().join("one.csv")).unwrap();
    let b = fs::read(dir.path().join("four.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 1 + 1 + 3);
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("experiment,n,estimate,ci_lo,ci_hi,reps,flags"));
}

#[test]
fn seed_flag_overrides_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "experiment = burke\nseed = 3\nreps = 200\n";
    run(dir.path(), cfg, &["--out", "file.csv"]);
    run(dir.path(), cfg, &["--seed", "3", "--out", "same.csv"]);
    run(dir.path(), cfg, &["--seed", "4", "--out", "other.csv"]);
    let file = fs::read_to_string(dir.path().join("file.csv")).unwrap();
    assert_eq!(
        file,
        fs::read_to_string(dir.path().join("same.csv")).unwrap()
    );
    let other = fs::read_to_string(dir.path().join("other.csv")).unwrap();
    assert_ne!(file, other);
    assert!(other.starts_with("# tandem-lab experiment=burke seed=4"));
}

#[test]
fn configuration_errors_fail_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "experiment = warp\n", &[]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment: warp"));
    let out = run(dir.path(), "experiment = shape\nh = -0.1\n", &[]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("h must be positive"));
    let out = run(dir.path(), "experiment = shape\nspeed = 3\n", &[]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2: unknown key: speed"));
}

#[test]
fn truncated_runs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "experiment = vertical\nn = 6\nh = 0.01\nreps = 40\nwindow_left = -1.5\n";
    let out = run(dir.path(), cfg, &["--out", "v.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalidated"));
}

#[test]
fn unwritable_output_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "experiment = discrete-equiv\nusers = 3\nservers = 3\n",
        &["--out", "missing/dir/x.csv"],
    );
    assert!(!out.status.success());
}
