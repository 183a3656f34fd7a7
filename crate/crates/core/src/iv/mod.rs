//! Bayesian integrated-variance estimator for prices observed with noise that is
//! correlated with latent returns.
//!
//! Model, for steps `t = 0..T−1`:
//!
//! ```text
//! θ(t+1) = θ(t) + vol(t)·ε1(t+1)
//! ξ(t+1) = θ(t+1) + corr_loading(t)·ε1(t+1) + noise_sd(t)·ε2(t+1)
//! ```
//!
//! with priors `corr_loading ~ N(μ_B, σ²_B)`, `vol ~ N(μ_b, σ²_b)` truncated to
//! `vol ≥ vol_floor`, and `noise_sd² ~ IG(α, β)`. Each Gibbs sweep draws the latent
//! path with generalized FFBS, the two noise parameters from their conjugate
//! conditionals, and `vol` with a Hamiltonian step. The estimate is the posterior
//! mean of the path's quadratic variation over post-burn-in sweeps.

mod conditionals;
mod gibbs;
pub mod hmc;
mod prior;

pub use conditionals::{block_stats, sample_corr_loading, sample_noise_var, sample_theta, BlockStats};
pub use gibbs::{gibbs_sweep, update_params, iv_point_and_interval, run_gibbs, IvPosterior, IvSummary, ParamDraw, SweepOutcome};
pub use hmc::{hmc_step_vol, HmcOutcome, HmcPotential, VolTarget};
pub use prior::{draw_from_prior, draw_observations, PriorHyper};

use crate::error::{Error, Result};
use crate::model::ScalarSystem;

/// Whether one parameter triple is shared by every step of the day or each step has its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamSharing {
    Shared,
    PerStep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    Fixed(f64),
    /// Initialised from the local curvature of the potential, then tuned during the
    /// first `pilot_iterations` sweeps (all inside burn-in) and frozen.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub step_size: StepSize,
    pub leapfrog_steps: usize,
    pub seed: u64,
    pub vol_floor: f64,
    pub sharing: ParamSharing,
    pub potential: HmcPotential,
    pub pilot_iterations: usize,
    /// Acceptance rate the pilot tunes towards.
    pub target_acceptance: f64,
    /// Variance of `θ(0)` around `ξ(0)` in the initial filter belief.
    pub initial_var: f64,
    /// Relative log-scale jitter applied to the initial parameters (0 = start at prior means).
    pub init_jitter: f64,
    pub keep_paths: bool,
    /// Holds `B̃1` at this value and skips its update (0 gives the uncorrelated sampler).
    pub fixed_corr_loading: Option<f64>,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            burn_in: 500,
            step_size: StepSize::Auto,
            leapfrog_steps: 10,
            seed: 0,
            vol_floor: 1e-8,
            sharing: ParamSharing::Shared,
            potential: HmcPotential::Full,
            pilot_iterations: 100,
            target_acceptance: 0.75,
            initial_var: 0.0,
            init_jitter: 0.0,
            keep_paths: false,
            fixed_corr_loading: None,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidConfig(format!(
                "burn-in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if let StepSize::Fixed(eps) = self.step_size {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidConfig(format!("step size must be positive, got {eps}")));
            }
        }
        if self.leapfrog_steps == 0 {
            return Err(Error::InvalidConfig("leapfrog steps must be at least 1".into()));
        }
        if !(self.vol_floor > 0.0) {
            return Err(Error::InvalidConfig("vol floor must be positive".into()));
        }
        if !(self.initial_var >= 0.0) {
            return Err(Error::InvalidConfig("initial variance must be non-negative".into()));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::InvalidConfig("target acceptance must lie in (0, 1)".into()));
        }
        if let Some(c) = self.fixed_corr_loading {
            if !c.is_finite() {
                return Err(Error::InvalidConfig("fixed corr loading must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Current values of every unknown in the sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    /// `θ(0..T)`.
    pub theta: Vec<f64>,
    /// `B̃1` per block.
    pub corr_loading: Vec<f64>,
    /// `B̃2²` per block.
    pub noise_var: Vec<f64>,
    /// `b1` per block.
    pub vol: Vec<f64>,
    pub sharing: ParamSharing,
}

impl ChainState {
    /// Parameter blocks all set to the given values.
    pub fn uniform(
        theta: Vec<f64>,
        sharing: ParamSharing,
        corr_loading: f64,
        noise_var: f64,
        vol: f64,
    ) -> Self {
        let steps = theta.len().saturating_sub(1);
        let blocks = match sharing {
            ParamSharing::Shared => 1,
            ParamSharing::PerStep => steps,
        };
        Self {
            theta,
            corr_loading: vec![corr_loading; blocks],
            noise_var: vec![noise_var; blocks],
            vol: vec![vol; blocks],
            sharing,
        }
    }

    pub fn steps(&self) -> usize {
        self.theta.len().saturating_sub(1)
    }

    pub fn blocks(&self) -> usize {
        self.vol.len()
    }

    #[inline]
    pub fn block_of(&self, t: usize) -> usize {
        match self.sharing {
            ParamSharing::Shared => 0,
            ParamSharing::PerStep => t,
        }
    }

    /// Step range covered by block `j`.
    pub fn block_steps(&self, j: usize) -> std::ops::Range<usize> {
        match self.sharing {
            ParamSharing::Shared => 0..self.steps(),
            ParamSharing::PerStep => j..j + 1,
        }
    }

    #[inline]
    pub fn system(&self, t: usize) -> ScalarSystem {
        let j = self.block_of(t);
        ScalarSystem::price_noise(self.vol[j], self.corr_loading[j], self.noise_var[j].sqrt())
    }

    /// Sum of squared increments of the current path.
    pub fn quadratic_variation(&self) -> f64 {
        quadratic_variation(&self.theta)
    }

    pub fn check(&self, vol_floor: f64) -> Result<()> {
        if self.noise_var.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvariantViolation("noise variance must be positive".into()));
        }
        if self.vol.iter().any(|&v| !(v >= vol_floor)) {
            return Err(Error::InvariantViolation(format!(
                "vol below floor {vol_floor:e}"
            )));
        }
        Ok(())
    }
}

pub fn quadratic_variation(path: &[f64]) -> f64 {
    path.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum()
}
