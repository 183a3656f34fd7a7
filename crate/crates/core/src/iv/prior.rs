use crate::error::{Error, Result};
use crate::rng::SimRng;

use super::{ChainState, ParamSharing};

/// Prior hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorHyper {
    /// Mean and variance of the Gaussian prior on the correlated noise loading `B̃1`.
    pub corr_mean: f64,
    pub corr_var: f64,
    /// Mean and variance of the Gaussian prior on the per-step return volatility `b1`.
    pub vol_mean: f64,
    pub vol_var: f64,
    /// Shape and scale of the inverse-gamma prior on the idiosyncratic noise variance `B̃2²`.
    pub noise_shape: f64,
    pub noise_scale: f64,
}

impl PriorHyper {
    /// One-second data, 23,400 steps per day, ρ = −0.10, NTS = 1.5, annual variance 0.06.
    pub fn one_second_defaults() -> Self {
        Self {
            corr_mean: -1.48e-5,
            corr_var: 1.53e-10,
            vol_mean: 1.21e-4,
            vol_var: 1.02e-8,
            noise_shape: 2.1,
            noise_scale: 1.99e-8,
        }
    }

    /// Hyperparameters offset from the true values by `offset` (1.2 = 20% away):
    /// means at `offset × truth`, variances at `truth²`, `IG` shape 2.1 with its mean at
    /// `offset × noise_sd²`.
    pub fn from_truth(vol: f64, corr_loading: f64, noise_sd: f64, offset: f64) -> Self {
        let shape = 2.1;
        Self {
            corr_mean: offset * corr_loading,
            corr_var: corr_loading * corr_loading,
            vol_mean: offset * vol,
            vol_var: vol * vol,
            noise_shape: shape,
            noise_scale: offset * noise_sd * noise_sd * (shape - 1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.corr_var > 0.0
            && self.vol_var > 0.0
            && self.noise_shape > 1.0
            && self.noise_scale > 0.0
            && self.corr_mean.is_finite()
            && self.vol_mean.is_finite()
            && self.corr_var.is_finite()
            && self.vol_var.is_finite()
            && self.noise_scale.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid prior hyperparameters: {self:?}")))
        }
    }

    /// Prior mean of `B̃2²`.
    pub fn noise_var_mean(&self) -> f64 {
        self.noise_scale / (self.noise_shape - 1.0)
    }

    /// `N(μ_b, σ²_b)` restricted to `[floor, ∞)`, by rejection.
    pub fn draw_vol(&self, floor: f64, rng: &mut SimRng) -> Result<f64> {
        let sd = self.vol_var.sqrt();
        for _ in 0..100_000 {
            let v = self.vol_mean + sd * rng.gaussian();
            if v >= floor {
                return Ok(v);
            }
        }
        Err(Error::InvalidConfig(
            "vol prior puts negligible mass above the floor".into(),
        ))
    }
}

/// Draws parameters from the prior and a path from its law given them, anchored at
/// `θ(0) = level`.
pub fn draw_from_prior(
    prior: &PriorHyper,
    steps: usize,
    sharing: ParamSharing,
    vol_floor: f64,
    level: f64,
    rng: &mut SimRng,
) -> Result<ChainState> {
    prior.validate()?;
    let blocks = match sharing {
        ParamSharing::Shared => 1,
        ParamSharing::PerStep => steps,
    };
    let mut corr = Vec::with_capacity(blocks);
    let mut noise = Vec::with_capacity(blocks);
    let mut vol = Vec::with_capacity(blocks);
    for _ in 0..blocks {
        corr.push(prior.corr_mean + prior.corr_var.sqrt() * rng.gaussian());
        noise.push(rng.inverse_gamma(prior.noise_shape, prior.noise_scale));
        vol.push(prior.draw_vol(vol_floor, rng)?);
    }
    let mut state = ChainState {
        theta: vec![level; steps + 1],
        corr_loading: corr,
        noise_var: noise,
        vol,
        sharing,
    };
    for t in 0..steps {
        let b = state.vol[state.block_of(t)];
        state.theta[t + 1] = state.theta[t] + b * rng.gaussian();
    }
    Ok(state)
}

/// Observations given the path and parameters: `ξ(0) = θ(0)` and
/// `ξ(t+1) | θ(t), θ(t+1) ~ N(θ(t+1) + (B̃1/b1)(θ(t+1) − θ(t)), B̃2²)`.
pub fn draw_observations(state: &ChainState, rng: &mut SimRng) -> Vec<f64> {
    let th = &state.theta;
    let mut xi = Vec::with_capacity(th.len());
    xi.push(th[0]);
    for t in 0..state.steps() {
        let j = state.block_of(t);
        let d = th[t + 1] - th[t];
        let mean = th[t + 1] + state.corr_loading[j] / state.vol[j] * d;
        xi.push(mean + state.noise_var[j].sqrt() * rng.gaussian());
    }
    xi
}
