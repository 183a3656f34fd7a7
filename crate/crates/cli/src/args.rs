//! Command-line flags. Every flag is optional; set flags override the config file.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use crate::config::{parse_methods, parse_potential, parse_sharing, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "cgseq", version, about = "Integrated-variance estimation under return-correlated microstructure noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate noisy log-price days; writes ticks.csv and truth.csv.
    Simulate(Flags),
    /// Posterior integrated variance for each day of --input; writes posterior.csv.
    Estimate(Flags),
    /// Score LIP, RV and TSRV on simulated days; writes bench.csv, errors.csv, posterior.csv
    /// and, with --qv-draws, qv.csv.
    Benchmark(Flags),
    /// Sign of the filtered-variance bias over a grid of B1_tilde; writes biasmap.csv.
    Biasmap(Flags),
}

impl Command {
    pub fn flags(&self) -> &Flags {
        match self {
            Command::Simulate(f) | Command::Estimate(f) | Command::Benchmark(f) | Command::Biasmap(f) => f,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Plain-text `key = value` file applied before the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Correlation between noise and returns.
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Noise-to-signal variance ratio.
    #[arg(long)]
    pub nts: Option<f64>,
    /// Annualized return variance.
    #[arg(long)]
    pub b1var: Option<f64>,
    #[arg(long)]
    pub days: Option<usize>,
    /// Increments per day.
    #[arg(long)]
    pub steps: Option<usize>,
    /// MCMC iterations including burn-in.
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// HMC step size, or `auto` to tune during burn-in.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Leapfrog steps per HMC proposal.
    #[arg(long)]
    pub leapfrog: Option<usize>,
    /// TSRV subsample count (default ceil(T^(2/3))).
    #[arg(long)]
    pub k_subsamples: Option<usize>,
    /// Posterior interval level.
    #[arg(long)]
    pub level: Option<f64>,
    /// Comma-separated subset of LIP,RV,TSRV.
    #[arg(long)]
    pub methods: Option<String>,
    /// `shared` or `per-step` parameters.
    #[arg(long)]
    pub sharing: Option<String>,
    /// `full` or `observation-only` HMC potential.
    #[arg(long)]
    pub potential: Option<String>,
    /// Prior means and initial values as a multiple of the true parameters.
    #[arg(long)]
    pub prior_offset: Option<f64>,
    /// Path draws per day for the correlated-vs-independent QV comparison.
    #[arg(long)]
    pub qv_draws: Option<usize>,
    /// |rho| fixing B2_tilde in the bias map.
    #[arg(long, allow_negative_numbers = true)]
    pub rho_ref: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub grid_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub grid_max: Option<f64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Tick CSV with header `day,timestamp,log_price`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

macro_rules! take {
    ($cfg:ident, $flags:ident, $($field:ident),*) => {
        $(if let Some(v) = $flags.$field.clone() { $cfg.$field = v; })*
    };
}

impl Flags {
    /// Defaults, then the config file, then the flags that were given.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let f = self;
        take!(cfg, f, rho, nts, b1var, days, steps, iters, burnin, seed, leapfrog, level, prior_offset, qv_draws, rho_ref, grid_min, grid_max, grid_points, output);
        if let Some(e) = &f.epsilon {
            cfg.set("epsilon", e)?;
        }
        if let Some(k) = f.k_subsamples {
            cfg.k_subsamples = Some(k);
        }
        if let Some(m) = &f.methods {
            cfg.methods = parse_methods(m)?;
        }
        if let Some(s) = &f.sharing {
            cfg.sharing = parse_sharing(s)?;
        }
        if let Some(p) = &f.potential {
            cfg.potential = parse_potential(p)?;
        }
        if let Some(i) = &f.input {
            cfg.input = Some(i.clone());
        }
        Ok(cfg)
    }
}
