use std::process::{Command, Output};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acrr-sim")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_prints_resolved_config() {
    let o = sim(&["validate", "desk", "--set", "policy.alpha=0.9", "--policy", "naive", "--seed", "42"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("policy.alpha = 0.9"), "{text}");
    assert!(text.contains("policy.kind = naive"));
    assert!(text.contains("sim.base_seed = 42"));
}

#[test]
fn validate_reports_bad_input() {
    for args in [
        &["validate", "desk", "--set", "policy.alpha=2"][..],
        &["validate", "desk", "--set", "policy.beta=1"],
        &["validate", "desk", "--set", "policy.alpha"],
        &["validate", "no-such-preset"],
    ] {
        let o = sim(args);
        assert!(!o.status.success(), "{args:?} succeeded");
        assert!(stderr(&o).starts_with("error:"), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn run_from_file_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.conf");
    std::fs::write(&cfg, "# small run\npreset = desk\nsim.time_s = 5\nadversary.malicious_fraction = 0.04\n").unwrap();
    let out = dir.path().join("out");
    let o = sim(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--replications", "3", "--jobs", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 4);
    assert!(out.join("aggregate.csv").exists());
    let meta = std::fs::read_to_string(out.join("meta.txt")).unwrap();
    assert!(meta.contains("sim.replications = 3"));
}

#[test]
fn single_replication_says_why_aggregate_is_missing() {
    let dir = tempfile::tempdir().unwrap();
    let o = sim(&["run", "desk", "--out", dir.path().to_str().unwrap(), "--replications", "1", "--set", "sim.time_s=3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("at least 2 replications"));
    assert!(!dir.path().join("aggregate.csv").exists());
}

#[test]
fn custom_sweep_restricted_to_one_policy() {
    let dir = tempfile::tempdir().unwrap();
    let o = sim(&[
        "sweep",
        "adversary.malicious_fraction=0,0.04",
        "--out",
        dir.path().to_str().unwrap(),
        "--policy",
        "acrr",
        "--replications",
        "2",
        "--set",
        "sim.time_s=3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let agg = std::fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    assert_eq!(agg.lines().count(), 3);
    assert!(agg.lines().skip(1).all(|l| l.split(',').nth(3) == Some("acrr")));
}

#[test]
fn unknown_sweep_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = sim(&["sweep", "fig9", "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("fig9"));
}
