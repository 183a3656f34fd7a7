//! The four subcommands. Each writes its CSV files into `cfg.output` and returns the
//! paths written plus any human-readable notes.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cgseq::bias::{bias_crossovers, bias_region_table, linear_grid, TRADING_DAYS};
use cgseq::iv::{iv_point_and_interval, run_gibbs, McmcConfig};
use cgseq::sim::{day_seed, run_benchmark, simulate_day};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::io::{fmt_f64, ingest_csv, write_ticks, CsvOut, TickSeries};

const ANNUALIZED: &str = "variances annualized (x252 trading days), computed per step";

#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.output).with_context(|| format!("creating output directory {}", cfg.output.display()))?;
    Ok(cfg.output.clone())
}

pub fn simulate(cfg: &RunConfig) -> Result<Outcome> {
    let design = cfg.design();
    design.validate()?;
    let dir = out_dir(cfg)?;
    let dt = cfg.session_seconds / design.steps as f64;
    let days = (0..design.days)
        .into_par_iter()
        .map(|d| simulate_day(&design, d))
        .collect::<cgseq::Result<Vec<_>>>()?;

    let series: Vec<TickSeries> = days
        .iter()
        .enumerate()
        .map(|(d, s)| TickSeries {
            day: d.to_string(),
            timestamps: (0..s.xi.len()).map(|t| t as f64 * dt).collect(),
            log_prices: s.xi.clone(),
        })
        .collect();
    let ticks = dir.join("ticks.csv");
    write_ticks(&ticks, &series, "timestamp in seconds from open; log_price in log units")?;

    let truth = dir.join("truth.csv");
    let mut w = CsvOut::create(
        &truth,
        &format!("{ANNUALIZED}; b1, B1_tilde, B2_tilde are annualized standard deviations"),
    )?;
    w.row(&["day", "true_qv", "b1", "B1_tilde", "B2_tilde"])?;
    let scale = (TRADING_DAYS * design.steps as f64).sqrt();
    for (d, s) in days.iter().enumerate() {
        w.row(&[
            d.to_string(),
            fmt_f64(s.true_qv * TRADING_DAYS),
            fmt_f64(s.params.b1 * scale),
            fmt_f64(s.params.b1_tilde * scale),
            fmt_f64(s.params.b2_tilde * scale),
        ])?;
    }
    w.finish()?;
    Ok(Outcome { files: vec![ticks, truth], notes: vec![format!("simulated {} days of {} steps", design.days, design.steps)] })
}

struct DayPosterior {
    day: String,
    mean: f64,
    lo: f64,
    hi: f64,
    accept: f64,
}

fn estimate_day(cfg: &RunConfig, mcmc: &McmcConfig, idx: usize, s: &TickSeries) -> Result<DayPosterior> {
    let steps = s.len() - 1;
    let prior = cfg.prior(steps).with_context(|| format!("prior for day {}", s.day))?;
    let mcmc = McmcConfig { seed: day_seed(mcmc.seed, idx), ..mcmc.clone() };
    let post = run_gibbs(&s.log_prices, &prior, &mcmc).with_context(|| format!("sampling day {}", s.day))?;
    let sum = iv_point_and_interval(&post.iv_draws, cfg.level)?;
    Ok(DayPosterior {
        day: s.day.clone(),
        mean: sum.estimate * TRADING_DAYS,
        lo: sum.lower * TRADING_DAYS,
        hi: sum.upper * TRADING_DAYS,
        accept: post.acceptance_rate,
    })
}

fn write_posterior(path: &Path, level: f64, rows: &[DayPosterior]) -> Result<()> {
    let mut w = CsvOut::create(path, &format!("{ANNUALIZED}; equal-tailed {level} posterior interval"))?;
    w.row(&["day", "iv_mean", "iv_lo", "iv_hi", "accept_rate"])?;
    for r in rows {
        w.row(&[r.day.clone(), fmt_f64(r.mean), fmt_f64(r.lo), fmt_f64(r.hi), fmt_f64(r.accept)])?;
    }
    w.finish()
}

/// Runs the sampler on every day of `cfg.input`. Without explicit prior keys, the prior is
/// derived from the design parameters at each day's number of increments.
pub fn estimate(cfg: &RunConfig) -> Result<Outcome> {
    let Some(input) = &cfg.input else { bail!("estimate needs --input <ticks.csv>") };
    let mcmc = cfg.mcmc();
    mcmc.validate()?;
    let ingested = ingest_csv(input)?;
    let mut notes = ingested.warnings;
    let mut usable = Vec::new();
    for s in &ingested.series {
        if s.len() < 3 {
            notes.push(format!("day {}: {} ticks, skipped", s.day, s.len()));
        } else {
            usable.push(s);
        }
    }
    let rows = usable
        .par_iter()
        .enumerate()
        .map(|(i, s)| estimate_day(cfg, &mcmc, i, s))
        .collect::<Result<Vec<_>>>()?;
    let dir = out_dir(cfg)?;
    let path = dir.join("posterior.csv");
    write_posterior(&path, cfg.level, &rows)?;
    notes.push(format!("estimated {} days", rows.len()));
    Ok(Outcome { files: vec![path], notes })
}

pub fn benchmark(cfg: &RunConfig) -> Result<Outcome> {
    let bench = cfg.bench()?;
    let report = run_benchmark(&bench)?;
    let dir = out_dir(cfg)?;
    let mut files = Vec::new();
    let mut notes = Vec::new();

    let path = dir.join("bench.csv");
    let mut w = CsvOut::create(&path, &format!("{ANNUALIZED}; error = estimate - true_qv"))?;
    w.row(&["method", "bias", "std", "rmse", "days"])?;
    for r in &report.rows {
        w.row(&[r.method.name().to_string(), fmt_f64(r.bias), fmt_f64(r.std), fmt_f64(r.rmse), r.days.to_string()])?;
        notes.push(format!(
            "{:<5} bias {:+.4e} (se {:.1e})  std {:.4e}  rmse {:.4e}",
            r.method.name(),
            r.bias,
            r.bias_se(),
            r.std,
            r.rmse
        ));
    }
    w.finish()?;
    files.push(path);

    let path = dir.join("errors.csv");
    let mut w = CsvOut::create(&path, ANNUALIZED)?;
    w.row(&["day", "method", "true_qv", "estimate", "abs_error"])?;
    for d in &report.days {
        for (m, v) in &d.estimates {
            w.row(&[d.day.to_string(), m.name().to_string(), fmt_f64(d.true_qv), fmt_f64(*v), fmt_f64((v - d.true_qv).abs())])?;
        }
    }
    w.finish()?;
    files.push(path);

    let lip: Vec<DayPosterior> = report
        .days
        .iter()
        .filter_map(|d| {
            d.lip.as_ref().map(|l| DayPosterior {
                day: d.day.to_string(),
                mean: l.estimate,
                lo: l.lower,
                hi: l.upper,
                accept: l.acceptance_rate,
            })
        })
        .collect();
    if !lip.is_empty() {
        let path = dir.join("posterior.csv");
        write_posterior(&path, cfg.level, &lip)?;
        files.push(path);
    }

    if !report.qv_comparison.is_empty() {
        let path = dir.join("qv.csv");
        let mut w = CsvOut::create(&path, &format!("{ANNUALIZED}; path draws at the true parameters"))?;
        w.row(&["day", "draw", "true_qv", "qv_correlated", "qv_independent"])?;
        for c in &report.qv_comparison {
            for (i, (a, b)) in c.correlated.iter().zip(&c.independent).enumerate() {
                w.row(&[c.day.to_string(), i.to_string(), fmt_f64(c.true_qv), fmt_f64(*a), fmt_f64(*b)])?;
            }
        }
        w.finish()?;
        files.push(path);
    }
    if report.tsrv_negative > 0 {
        notes.push(format!("TSRV was negative on {} of {} days", report.tsrv_negative, report.days.len()));
    }
    Ok(Outcome { files, notes })
}

/// Sign of the filtered-variance bias over a grid of annualized `B̃1`, with `B̃2` fixed at
/// the value implied by `|ρ| = rho_ref`.
pub fn biasmap(cfg: &RunConfig) -> Result<Outcome> {
    if !(cfg.b1var > 0.0 && cfg.nts > 0.0) {
        bail!("biasmap needs b1var > 0 and nts > 0");
    }
    if !(0.0..1.0).contains(&cfg.rho_ref.abs()) {
        bail!("rho_ref must satisfy |rho_ref| < 1, got {}", cfg.rho_ref);
    }
    if !(cfg.grid_min < cfg.grid_max) || cfg.grid_points < 2 {
        bail!("need grid_min < grid_max and grid_points >= 2");
    }
    let b1 = cfg.b1var.sqrt();
    let b2t = ((1.0 - cfg.rho_ref * cfg.rho_ref) * cfg.b1var * cfg.nts).sqrt();
    let grid = linear_grid(cfg.grid_min, cfg.grid_max, cfg.grid_points);
    let rows = bias_region_table(b1, b2t, &grid)?;
    let dir = out_dir(cfg)?;
    let path = dir.join("biasmap.csv");
    let mut w = CsvOut::create(
        &path,
        &format!("annualized standard deviations; b1 = {}, B2_tilde = {}", fmt_f64(b1), fmt_f64(b2t)),
    )?;
    w.row(&["B1_tilde", "lhs", "rhs", "sign"])?;
    for r in &rows {
        w.row(&[fmt_f64(r.b1_tilde), fmt_f64(r.lhs), fmt_f64(r.rhs), r.sign.label().to_string()])?;
    }
    w.finish()?;
    let roots = bias_crossovers(b1, b2t, cfg.grid_min, cfg.grid_max, cfg.grid_points);
    let listed: Vec<String> = roots.iter().map(|r| format!("{r:.6}")).collect();
    Ok(Outcome { files: vec![path], notes: vec![format!("sign changes at B1_tilde = [{}]", listed.join(", "))] })
}
