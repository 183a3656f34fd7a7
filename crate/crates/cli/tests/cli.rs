use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cgseq_cli::{ingest_csv, write_ticks, TickSeries};
use cgseq_testkit::random::rng;
use rand::Rng;

fn cgseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgseq")).args(args).output().expect("spawn cgseq")
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn help_exits_zero_for_every_subcommand() {
    for sub in ["simulate", "estimate", "benchmark", "biasmap"] {
        let out = cgseq(&[sub, "--help"]);
        assert!(out.status.success(), "{sub}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("--output"));
    }
    assert!(cgseq(&["--help"]).status.success());
}

#[test]
fn simulate_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = cgseq(&["simulate", "--rho", "-0.10", "--days", "2", "--seed", "7", "--output", dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["ticks.csv", "truth.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let rows = data_rows(&a.join("ticks.csv"));
    assert_eq!(rows.len(), 2 * 2_341);
    assert_eq!(rows.last().unwrap()[1].parse::<f64>().unwrap(), 23_400.0);
}

#[test]
fn different_seeds_give_different_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    cgseq(&["simulate", "--days", "1", "--steps", "50", "--seed", "1", "--output", a.to_str().unwrap()]);
    cgseq(&["simulate", "--days", "1", "--steps", "50", "--seed", "2", "--output", b.to_str().unwrap()]);
    assert_ne!(fs::read(a.join("ticks.csv")).unwrap(), fs::read(b.join("ticks.csv")).unwrap());
}

#[test]
fn biasmap_reports_published_crossovers() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cgseq(&["biasmap", "--b1var", "0.06", "--nts", "1.5", "--output", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let rows = data_rows(&tmp.path().join("biasmap.csv"));
    let mut changes = Vec::new();
    for w in rows.windows(2) {
        let sign = |r: &Vec<String>| r[3].clone();
        if sign(&w[0]) != sign(&w[1]) && sign(&w[1]) != "boundary" {
            changes.push(w[1][0].parse::<f64>().unwrap());
        }
    }
    let hit = |x: f64| changes.iter().any(|c| (c - x).abs() < 0.005);
    assert!(hit(-0.245) && hit(0.281), "{changes:?}");
}

#[test]
fn estimate_writes_one_row_per_day() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    let est = tmp.path().join("est");
    cgseq(&["simulate", "--days", "2", "--steps", "200", "--seed", "4", "--output", sim.to_str().unwrap()]);
    let ticks = sim.join("ticks.csv");
    let out = cgseq(&[
        "estimate", "--input", ticks.to_str().unwrap(), "--iters", "200", "--burnin", "100", "--output", est.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(est.join("posterior.csv")).unwrap();
    assert!(text.starts_with("# units:"));
    let rows = data_rows(&est.join("posterior.csv"));
    assert_eq!(rows.len(), 2);
    for r in rows {
        let v: Vec<f64> = r[1..].iter().map(|x| x.parse().unwrap()).collect();
        assert!(v[1] <= v[0] && v[0] <= v[2], "{r:?}");
        assert!((0.0..=1.0).contains(&v[3]));
    }
}

#[test]
fn benchmark_writes_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cgseq(&[
        "benchmark", "--days", "2", "--steps", "100", "--iters", "60", "--burnin", "30", "--qv-draws", "5",
        "--output", tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bench = data_rows(&tmp.path().join("bench.csv"));
    let methods: Vec<_> = bench.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(methods, ["LIP", "RV", "TSRV"]);
    assert_eq!(data_rows(&tmp.path().join("errors.csv")).len(), 6);
    assert_eq!(data_rows(&tmp.path().join("qv.csv")).len(), 10);
}

#[test]
fn errors_exit_nonzero_with_message() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "rho = 0.1\nwidth = 3\n").unwrap();
    let out = cgseq(&["simulate", "--config", cfg.to_str().unwrap(), "--output", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown configuration key `width`"));

    let out = cgseq(&["estimate", "--input", "/nonexistent/ticks.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/ticks.csv"));

    let out = cgseq(&["simulate", "--rho", "1.5", "--output", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_is_used_and_flags_override_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "days = 3\nsteps = 40\nseed = 1\n").unwrap();
    let dir = tmp.path().join("out");
    let out = cgseq(&["simulate", "--config", cfg.to_str().unwrap(), "--steps", "20", "--output", dir.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(data_rows(&dir.join("ticks.csv")).len(), 3 * 21);
}

#[test]
fn large_fixture_round_trips_exactly() {
    let mut g = rng(77);
    let mut series = Vec::new();
    let mut rows = 0;
    for day in 0..40 {
        let n = 2_500;
        let mut t = 0.0;
        let mut ts = Vec::with_capacity(n);
        let mut lp = Vec::with_capacity(n);
        for _ in 0..n {
            t += g.random_range(1e-3..3.0);
            ts.push(t);
            lp.push(4.6 + g.random_range(-1.0..1.0) * 10f64.powi(g.random_range(-12..1)));
        }
        rows += n;
        series.push(TickSeries { day: (day * 3).to_string(), timestamps: ts, log_prices: lp });
    }
    assert_eq!(rows, 100_000);
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("a.csv");
    let second = tmp.path().join("b.csv");
    write_ticks(&first, &series, "test").unwrap();
    let back = ingest_csv(&first).unwrap();
    assert!(back.warnings.is_empty());
    assert_eq!(back.series, series);
    write_ticks(&second, &back.series, "test").unwrap();
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}
