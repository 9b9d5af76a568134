use std::process::Command;

use cohesive_phase::experiments::CSV_SCHEMA;

fn cli(args: &[&str], out: &std::path::Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_cohesive-phase"))
        .args(args)
        .args(["--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stdout).into_owned())
}

#[test]
fn passing_run_writes_versioned_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout) = cli(&["bv-test"], dir.path());
    assert_eq!(code, 0, "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_SCHEMA));
    assert!(lines.next().unwrap().starts_with("subcommand,"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn metric_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout) = cli(&["envelope-check", "--q_list", "2", "--deltas", "0.2", "--tol", "0.01"], dir.path());
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cli(&["no-such-command"], dir.path()).0, 2);
    assert_eq!(cli(&["bv-test", "--n"], dir.path()).0, 2);
    assert_eq!(cli(&["bv-test", "--n", "3"], dir.path()).0, 2);
    assert_eq!(cli(&["g-scal", "--p", "0.5"], dir.path()).0, 2);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.cfg");
    std::fs::write(&cfg, "# projection job\ndensity = compressible_hat\nsamples = 200\n").unwrap();
    let (code, stdout) = cli(&["projection-check", "--config", cfg.to_str().unwrap(), "--expect", "holds"], dir.path());
    // compressible_hat violates the property, so expecting it to hold fails.
    assert_eq!(code, 1, "{stdout}");
}

#[test]
fn same_seed_same_metrics() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["quantize-check", "--seed", "3", "--fields", "50"];
    assert_eq!(cli(&args, a.path()).0, 0);
    assert_eq!(cli(&args, b.path()).0, 0);
    let strip = |p: &std::path::Path| -> Vec<String> {
        let text = std::fs::read_to_string(p.join("results.csv")).unwrap();
        // Drop the wall-time column, which is the only nondeterministic field.
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        r.records()
            .map(|rec| {
                let rec = rec.unwrap();
                format!("{} {} {} {}", &rec[2], &rec[3], &rec[5], &rec[7])
            })
            .collect()
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}
