//! Run configuration: defaults, optional `key = value` file, then command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use cgseq::iv::{HmcPotential, McmcConfig, ParamSharing, PriorHyper, StepSize};
use cgseq::sim::{BenchConfig, Method, SimDesign};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub rho: f64,
    pub nts: f64,
    /// Annualized variance of returns.
    pub b1var: f64,
    pub days: usize,
    pub steps: usize,
    pub seed: u64,
    pub iters: usize,
    pub burnin: usize,
    /// `None` tunes the step size during burn-in.
    pub epsilon: Option<f64>,
    pub leapfrog: usize,
    pub k_subsamples: Option<usize>,
    pub level: f64,
    pub sharing: ParamSharing,
    pub potential: HmcPotential,
    pub prior_offset: f64,
    pub vol_floor: f64,
    pub corr_mean: Option<f64>,
    pub corr_var: Option<f64>,
    pub vol_mean: Option<f64>,
    pub vol_var: Option<f64>,
    pub noise_shape: Option<f64>,
    pub noise_scale: Option<f64>,
    pub methods: Vec<Method>,
    pub qv_draws: usize,
    pub rho_ref: f64,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
    pub session_seconds: f64,
    pub input: Option<PathBuf>,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let design = SimDesign::default();
        let mcmc = McmcConfig::default();
        Self {
            rho: design.rho,
            nts: design.nts,
            b1var: design.annual_var,
            days: design.days,
            steps: design.steps,
            seed: 0,
            iters: 400,
            burnin: 200,
            epsilon: None,
            leapfrog: mcmc.leapfrog_steps,
            k_subsamples: None,
            level: 0.95,
            sharing: ParamSharing::Shared,
            potential: HmcPotential::Full,
            prior_offset: 1.2,
            vol_floor: mcmc.vol_floor,
            corr_mean: None,
            corr_var: None,
            vol_mean: None,
            vol_var: None,
            noise_shape: None,
            noise_scale: None,
            methods: vec![Method::Lip, Method::Rv, Method::Tsrv],
            qv_draws: 0,
            rho_ref: 0.9,
            grid_min: -1.0,
            grid_max: 1.0,
            grid_points: 2001,
            session_seconds: 23_400.0,
            input: None,
            output: PathBuf::from("out"),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| anyhow!("invalid value {value:?} for `{key}`: {e}"))
}

pub fn parse_sharing(s: &str) -> Result<ParamSharing> {
    match s {
        "shared" => Ok(ParamSharing::Shared),
        "per-step" | "per_step" => Ok(ParamSharing::PerStep),
        _ => bail!("sharing must be `shared` or `per-step`, got {s:?}"),
    }
}

pub fn parse_potential(s: &str) -> Result<HmcPotential> {
    match s {
        "full" => Ok(HmcPotential::Full),
        "observation-only" | "observation_only" => Ok(HmcPotential::ObservationOnly),
        _ => bail!("potential must be `full` or `observation-only`, got {s:?}"),
    }
}

pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    s.split(',')
        .map(str::trim)
        .filter(|m| !m.is_empty())
        .map(|m| Method::parse(m).ok_or_else(|| anyhow!("unknown method {m:?} (expected LIP, RV or TSRV)")))
        .collect()
}

fn parse_epsilon(s: &str) -> Result<Option<f64>> {
    if s == "auto" {
        Ok(None)
    } else {
        parse("epsilon", s).map(Some)
    }
}

impl RunConfig {
    /// Sets one key; `-` and `_` are interchangeable in key names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "rho" => self.rho = parse(&key, v)?,
            "nts" => self.nts = parse(&key, v)?,
            "b1var" => self.b1var = parse(&key, v)?,
            "days" => self.days = parse(&key, v)?,
            "steps" => self.steps = parse(&key, v)?,
            "seed" => self.seed = parse(&key, v)?,
            "iters" => self.iters = parse(&key, v)?,
            "burnin" => self.burnin = parse(&key, v)?,
            "epsilon" => self.epsilon = parse_epsilon(v)?,
            "leapfrog" => self.leapfrog = parse(&key, v)?,
            "k_subsamples" => self.k_subsamples = Some(parse(&key, v)?),
            "level" => self.level = parse(&key, v)?,
            "sharing" => self.sharing = parse_sharing(v)?,
            "potential" => self.potential = parse_potential(v)?,
            "prior_offset" => self.prior_offset = parse(&key, v)?,
            "vol_floor" => self.vol_floor = parse(&key, v)?,
            "corr_mean" => self.corr_mean = Some(parse(&key, v)?),
            "corr_var" => self.corr_var = Some(parse(&key, v)?),
            "vol_mean" => self.vol_mean = Some(parse(&key, v)?),
            "vol_var" => self.vol_var = Some(parse(&key, v)?),
            "noise_shape" => self.noise_shape = Some(parse(&key, v)?),
            "noise_scale" => self.noise_scale = Some(parse(&key, v)?),
            "methods" => self.methods = parse_methods(v)?,
            "qv_draws" => self.qv_draws = parse(&key, v)?,
            "rho_ref" => self.rho_ref = parse(&key, v)?,
            "grid_min" => self.grid_min = parse(&key, v)?,
            "grid_max" => self.grid_max = parse(&key, v)?,
            "grid_points" => self.grid_points = parse(&key, v)?,
            "session_seconds" => self.session_seconds = parse(&key, v)?,
            "input" => self.input = Some(PathBuf::from(v)),
            "output" => self.output = PathBuf::from(v),
            _ => bail!("unknown configuration key `{key}`"),
        }
        Ok(())
    }

    /// Applies a `key = value` file; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        self.apply_str(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, got {raw:?}", i + 1))?;
            self.set(k, v).with_context(|| format!("line {}", i + 1))?;
        }
        Ok(())
    }

    pub fn design(&self) -> SimDesign {
        SimDesign {
            rho: self.rho,
            nts: self.nts,
            annual_var: self.b1var,
            steps: self.steps,
            days: self.days,
            seed: self.seed,
        }
    }

    pub fn mcmc(&self) -> McmcConfig {
        McmcConfig {
            iterations: self.iters,
            burn_in: self.burnin,
            step_size: self.epsilon.map_or(StepSize::Auto, StepSize::Fixed),
            leapfrog_steps: self.leapfrog,
            seed: self.seed,
            vol_floor: self.vol_floor,
            sharing: self.sharing,
            potential: self.potential,
            ..Default::default()
        }
    }

    /// Prior from explicit keys where given, otherwise offset from the design's truth for
    /// days of `steps` increments.
    pub fn prior(&self, steps: usize) -> Result<PriorHyper> {
        let design = SimDesign { steps, ..self.design() };
        let base = design.prior(self.prior_offset)?;
        let p = PriorHyper {
            corr_mean: self.corr_mean.unwrap_or(base.corr_mean),
            corr_var: self.corr_var.unwrap_or(base.corr_var),
            vol_mean: self.vol_mean.unwrap_or(base.vol_mean),
            vol_var: self.vol_var.unwrap_or(base.vol_var),
            noise_shape: self.noise_shape.unwrap_or(base.noise_shape),
            noise_scale: self.noise_scale.unwrap_or(base.noise_scale),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn bench(&self) -> Result<BenchConfig> {
        let prior = self.prior(self.steps)?;
        Ok(BenchConfig {
            design: self.design(),
            methods: self.methods.clone(),
            mcmc: self.mcmc(),
            prior_offset: self.prior_offset,
            prior: Some(prior),
            subsamples: self.k_subsamples,
            level: self.level,
            qv_comparison_draws: self.qv_draws,
        })
    }
}
