use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const FAST_CONFIG: &str = "\
total_movements = 200
eval_period = 100
reach_samples = 3000
shakedown_movements = 300
";

fn sgim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = sgim(args);
    assert!(
        out.status.success(),
        "sgim {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_is_reproducible_and_reportable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fast.toml");
    fs::write(&cfg, FAST_CONFIG).unwrap();
    let bench = dir.path().join("bench.csv");
    ok(&[
        "benchmark",
        "--config",
        path(&cfg),
        "--seed",
        "11",
        "--out",
        path(&bench),
    ]);
    assert!(fs::read_to_string(&bench).unwrap().lines().count() > 10);

    let runs: Vec<_> = ["a", "b"].iter().map(|n| dir.path().join(n)).collect();
    for r in &runs {
        let stdout = ok(&[
            "run",
            "--config",
            path(&cfg),
            "--strategy",
            "sagg_riac",
            "--seed",
            "4",
            "--benchmark",
            path(&bench),
            "--out",
            path(r),
        ]);
        assert!(stdout.contains("final mean error"));
    }
    for file in ["timeline.csv", "memory.csv", "goals.csv", "regions.csv", "meta.toml"] {
        assert_eq!(
            fs::read(runs[0].join(file)).unwrap(),
            fs::read(runs[1].join(file)).unwrap(),
            "{file}"
        );
    }
    assert_eq!(
        fs::read_to_string(runs[0].join("timeline.csv"))
            .unwrap()
            .lines()
            .count(),
        2
    );

    let report = ok(&["report", path(&runs[0]), path(&runs[1])]);
    let rows: Vec<&str> = report.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("100,"));
    assert!(rows.iter().all(|r| r.ends_with(",2")));

    let hist = dir.path().join("hist");
    let stdout = ok(&[
        "hist",
        "--config",
        path(&cfg),
        "--run",
        path(&runs[0]),
        "--out",
        path(&hist),
    ]);
    assert!(stdout.contains("occupied cells"));
    let grid = fs::read_to_string(hist.join("outcomes_hist.csv")).unwrap();
    assert_eq!(grid.lines().count(), 16);
    assert!(grid.lines().all(|l| l.split(',').count() == 26));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fast.toml");
    fs::write(&cfg, FAST_CONFIG).unwrap();
    let bench = dir.path().join("bench.csv");
    ok(&["benchmark", "--config", path(&cfg), "--out", path(&bench)]);
    let out = dir.path().join("run");
    ok(&[
        "run",
        "--config",
        path(&cfg),
        "--strategy",
        "random",
        "--total-movements",
        "150",
        "--eval-period",
        "50",
        "--noise-sigma",
        "0.01",
        "--seed",
        "2",
        "--benchmark",
        path(&bench),
        "--out",
        path(&out),
    ]);
    let meta = fs::read_to_string(out.join("meta.toml")).unwrap();
    assert!(meta.contains("movements = 150"));
    assert!(meta.contains("noise_sigma = 0.01"));
    assert!(meta.contains("strategy = \"random\""));
    assert_eq!(fs::read_to_string(out.join("timeline.csv")).unwrap().lines().count(), 3);
}

#[test]
fn sweep_writes_shared_inputs_and_one_directory_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fast.toml");
    fs::write(&cfg, FAST_CONFIG).unwrap();
    let out = dir.path().join("sweep");
    ok(&[
        "sweep",
        "--config",
        path(&cfg),
        "--strategies",
        "random,demo_only",
        "--seeds",
        "1,2",
        "--jobs",
        "2",
        "--demo-period",
        "50",
        "--out",
        path(&out),
    ]);
    assert!(out.join("benchmark.csv").is_file());
    assert_eq!(
        fs::read_to_string(out.join("teaching.csv")).unwrap().lines().count(),
        27
    );
    for s in ["random", "demo_only"] {
        for seed in [1, 2] {
            assert!(out.join(s).join(format!("seed-{seed}")).join("meta.toml").is_file());
        }
    }
    let meta = fs::read_to_string(out.join("demo_only/seed-1/meta.toml")).unwrap();
    assert!(meta.contains("demonstrations = 4"));
}

#[test]
fn invalid_invocations_fail() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    assert!(
        !sgim(&["run", "--out", path(&out)]).status.success(),
        "--seed is required"
    );
    assert!(
        !sgim(&["run", "--seed", "1", "--strategy", "greedy", "--out", path(&out)])
            .status
            .success()
    );
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "total_movements = 1000\neval_period = 300\n").unwrap();
    let res = sgim(&["benchmark", "--config", path(&bad), "--out", path(&out)]);
    assert!(!res.status.success());
    assert!(!String::from_utf8_lossy(&res.stderr).is_empty());
    let unknown = dir.path().join("unknown.toml");
    fs::write(&unknown, "total_movement = 10\n").unwrap();
    assert!(!sgim(&["benchmark", "--config", path(&unknown), "--out", path(&out)])
        .status
        .success());
    assert!(!sgim(&["report", path(&out)]).status.success());
}
