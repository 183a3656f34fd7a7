//! Synthetic high-frequency prices with return-correlated noise, baseline realized
//! variance estimators, and a Monte Carlo benchmark harness.

use rayon::prelude::*;

use crate::bias::{per_step_vol, SteadyParams, Units, TRADING_DAYS};
use crate::error::{Error, Result};
use crate::gffbs;
use crate::iv::{self, iv_point_and_interval, McmcConfig, PriorHyper};
use crate::model::ScalarSystem;
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimDesign {
    pub rho: f64,
    pub nts: f64,
    pub annual_var: f64,
    pub steps: usize,
    pub days: usize,
    pub seed: u64,
}

impl Default for SimDesign {
    fn default() -> Self {
        Self { rho: -0.10, nts: 1.5, annual_var: 0.06, steps: 2_340, days: 50, seed: 0 }
    }
}

impl SimDesign {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidConfig(format!("|rho| must be < 1, got {}", self.rho)));
        }
        if !(self.nts > 0.0 && self.nts.is_finite()) {
            return Err(Error::InvalidConfig(format!("nts must be positive, got {}", self.nts)));
        }
        if !(self.annual_var > 0.0 && self.annual_var.is_finite()) {
            return Err(Error::InvalidConfig(format!("annual variance must be positive, got {}", self.annual_var)));
        }
        if self.steps < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 steps per day, got {}", self.steps)));
        }
        Ok(())
    }

    /// True per-step parameters.
    pub fn params(&self) -> Result<SteadyParams> {
        let b = per_step_vol(self.annual_var, self.steps);
        SteadyParams::from_design(b * b, self.nts, self.rho, Units::PerStep)
    }

    /// Hyperparameters offset from the truth by `offset`.
    pub fn prior(&self, offset: f64) -> Result<PriorHyper> {
        let p = self.params()?;
        let corr = if p.b1_tilde == 0.0 { p.b2_tilde * 1e-3 } else { p.b1_tilde };
        Ok(PriorHyper::from_truth(p.b1, corr, p.b2_tilde, offset))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimDay {
    pub theta: Vec<f64>,
    pub xi: Vec<f64>,
    pub true_qv: f64,
    pub params: SteadyParams,
}

/// Day `day` of the design; each day has its own random stream derived from the seed.
/// `θ(0) = ξ(0) = 0`.
pub fn simulate_day(d: &SimDesign, day: usize) -> Result<SimDay> {
    d.validate()?;
    let p = d.params()?;
    let mut rng = SimRng::derive(d.seed, day as u64);
    let mut theta = Vec::with_capacity(d.steps + 1);
    let mut xi = Vec::with_capacity(d.steps + 1);
    theta.push(0.0);
    xi.push(0.0);
    for t in 0..d.steps {
        let e1 = rng.gaussian();
        let e2 = rng.gaussian();
        let next = theta[t] + p.b1 * e1;
        theta.push(next);
        xi.push(next + p.b1_tilde * e1 + p.b2_tilde * e2);
    }
    let true_qv = iv::quadratic_variation(&theta);
    Ok(SimDay { theta, xi, true_qv, params: p })
}

pub fn rv_naive(xi: &[f64]) -> Result<f64> {
    if xi.len() < 2 {
        return Err(Error::TooFewObservations { got: xi.len(), need: 2 });
    }
    Ok(iv::quadratic_variation(xi))
}

/// Default number of subsamples `⌈T^{2/3}⌉` for `T` increments.
pub fn default_subsamples(increments: usize) -> usize {
    let k = (increments as f64).powf(2.0 / 3.0);
    let r = k.round();
    if (k - r).abs() < 1e-9 * r.max(1.0) {
        r as usize
    } else {
        k.ceil() as usize
    }
}

/// Two-scale realized variance with `k` subsample grids: mean of the `k` sparse
/// realized variances minus `(n̄/T)·RV`, `n̄ = (T − k + 1)/k`. May be negative.
pub fn rv_two_scale(xi: &[f64], k: usize) -> Result<f64> {
    let rv = rv_naive(xi)?;
    let t = xi.len() - 1;
    if k == 0 || k >= t {
        return Err(Error::InvalidInput(format!("subsample count {k} must lie in [1, {t})")));
    }
    let mut sparse = 0.0;
    for j in 0..k {
        let mut prev = xi[j];
        let mut i = j + k;
        while i <= t {
            sparse += (xi[i] - prev).powi(2);
            prev = xi[i];
            i += k;
        }
    }
    let avg = sparse / k as f64;
    let nbar = (t - k + 1) as f64 / k as f64;
    Ok(avg - nbar / t as f64 * rv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Lip,
    Rv,
    Tsrv,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Lip => "LIP",
            Method::Rv => "RV",
            Method::Tsrv => "TSRV",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LIP" => Some(Method::Lip),
            "RV" => Some(Method::Rv),
            "TSRV" => Some(Method::Tsrv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub design: SimDesign,
    pub methods: Vec<Method>,
    pub mcmc: McmcConfig,
    /// Hyperparameter means (and chain start) at `offset × truth`.
    pub prior_offset: f64,
    /// Overrides the prior derived from the truth.
    pub prior: Option<PriorHyper>,
    pub subsamples: Option<usize>,
    pub level: f64,
    /// Posterior QV draws per day at the true parameters, with and without the
    /// correlation, for histogram comparison. 0 disables.
    pub qv_comparison_draws: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            design: SimDesign::default(),
            methods: vec![Method::Lip, Method::Rv, Method::Tsrv],
            mcmc: McmcConfig { iterations: 400, burn_in: 200, ..Default::default() },
            prior_offset: 1.2,
            prior: None,
            subsamples: None,
            level: 0.95,
            qv_comparison_draws: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipDay {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub acceptance_rate: f64,
}

/// One simulated day. Variances are annualized.
#[derive(Debug, Clone, PartialEq)]
pub struct DayRecord {
    pub day: usize,
    pub true_qv: f64,
    pub estimates: Vec<(Method, f64)>,
    pub lip: Option<LipDay>,
    pub tsrv_negative: bool,
}

impl DayRecord {
    pub fn estimate(&self, m: Method) -> Option<f64> {
        self.estimates.iter().find(|(k, _)| *k == m).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub bias: f64,
    pub std: f64,
    pub rmse: f64,
    pub days: usize,
}

impl BenchRow {
    /// Mean, population standard deviation and root mean square of the errors.
    pub fn from_errors(method: Method, errors: &[f64]) -> Result<Self> {
        if errors.is_empty() {
            return Err(Error::EmptyDraws);
        }
        let n = errors.len() as f64;
        let bias = errors.iter().sum::<f64>() / n;
        let var = errors.iter().map(|e| (e - bias).powi(2)).sum::<f64>() / n;
        let ms = errors.iter().map(|e| e * e).sum::<f64>() / n;
        Ok(Self { method, bias, std: var.sqrt(), rmse: ms.sqrt(), days: errors.len() })
    }

    /// Standard error of the bias.
    pub fn bias_se(&self) -> f64 {
        self.std / ((self.days.max(2) - 1) as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QvComparison {
    pub day: usize,
    pub true_qv: f64,
    pub correlated: Vec<f64>,
    pub independent: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub days: Vec<DayRecord>,
    pub tsrv_negative: usize,
    pub qv_comparison: Vec<QvComparison>,
}

impl BenchReport {
    pub fn row(&self, m: Method) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.method == m)
    }
}

/// Per-day MCMC seed mixed from the run seed.
pub fn day_seed(seed: u64, day: usize) -> u64 {
    let mut z = seed ^ (day as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Posterior QV draws at the true parameters, and with the noise treated as independent
/// of returns (same total noise variance).
pub fn qv_comparison(day: &SimDay, draws: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = day.params;
    let correct = ScalarSystem::price_noise(p.b1, p.b1_tilde, p.b2_tilde);
    let naive = ScalarSystem::price_noise(p.b1, 0.0, p.b1_tilde.hypot(p.b2_tilde));
    let mut rng = SimRng::seed_from(seed);
    let mut run = |s: ScalarSystem| -> Result<Vec<f64>> {
        (0..draws)
            .map(|_| {
                gffbs::scalar::sample_path(|_| s, &day.xi[1..], day.xi[0], 0.0, &mut rng)
                    .map(|th| iv::quadratic_variation(&th) * TRADING_DAYS)
            })
            .collect()
    };
    let a = run(correct)?;
    let b = run(naive)?;
    Ok((a, b))
}

fn bench_day(cfg: &BenchConfig, prior: &PriorHyper, k: usize, day: usize) -> Result<(DayRecord, Option<QvComparison>)> {
    let sim = simulate_day(&cfg.design, day)?;
    let mut estimates = Vec::with_capacity(cfg.methods.len());
    let mut lip = None;
    let mut tsrv_negative = false;
    for &m in &cfg.methods {
        let v = match m {
            Method::Rv => rv_naive(&sim.xi)?,
            Method::Tsrv => {
                let v = rv_two_scale(&sim.xi, k)?;
                tsrv_negative = v < 0.0;
                v
            }
            Method::Lip => {
                let mcmc = McmcConfig { seed: day_seed(cfg.mcmc.seed, day), ..cfg.mcmc.clone() };
                let post = iv::run_gibbs(&sim.xi, prior, &mcmc)?;
                let s = iv_point_and_interval(&post.iv_draws, cfg.level)?;
                lip = Some(LipDay {
                    estimate: s.estimate * TRADING_DAYS,
                    lower: s.lower * TRADING_DAYS,
                    upper: s.upper * TRADING_DAYS,
                    acceptance_rate: post.acceptance_rate,
                });
                s.estimate
            }
        };
        estimates.push((m, v * TRADING_DAYS));
    }
    let cmp = if cfg.qv_comparison_draws > 0 {
        let (correlated, independent) =
            qv_comparison(&sim, cfg.qv_comparison_draws, day_seed(cfg.design.seed ^ 0x5eed, day))?;
        Some(QvComparison { day, true_qv: sim.true_qv * TRADING_DAYS, correlated, independent })
    } else {
        None
    };
    Ok((
        DayRecord { day, true_qv: sim.true_qv * TRADING_DAYS, estimates, lip, tsrv_negative },
        cmp,
    ))
}

/// Simulates every day of the design in parallel and scores each method against the
/// true quadratic variation.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.design.validate()?;
    if cfg.methods.is_empty() {
        return Err(Error::InvalidConfig("no methods selected".into()));
    }
    if cfg.design.days == 0 {
        return Err(Error::InvalidConfig("need at least one day".into()));
    }
    let prior = match cfg.prior {
        Some(p) => p,
        None => cfg.design.prior(cfg.prior_offset)?,
    };
    let k = cfg.subsamples.unwrap_or_else(|| default_subsamples(cfg.design.steps));
    let results: Vec<_> = (0..cfg.design.days)
        .into_par_iter()
        .map(|day| bench_day(cfg, &prior, k, day))
        .collect::<Result<_>>()?;
    let (days, cmps): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let rows = cfg
        .methods
        .iter()
        .map(|&m| {
            let errs: Vec<f64> = days.iter().map(|d| d.estimate(m).unwrap_or(f64::NAN) - d.true_qv).collect();
            BenchRow::from_errors(m, &errs)
        })
        .collect::<Result<_>>()?;
    let tsrv_negative = days.iter().filter(|d| d.tsrv_negative).count();
    Ok(BenchReport { rows, days, tsrv_negative, qv_comparison: cmps.into_iter().flatten().collect() })
}
