use crate::error::{Error, Result};
use crate::filter;
use crate::rng::SimRng;

use super::conditionals::{block_stats, sample_corr_loading, sample_noise_var, sample_theta};
use super::hmc::{hmc_step_vol, HmcOutcome, VolTarget};
use super::{ChainState, McmcConfig, PriorHyper, StepSize};

/// Block-averaged parameter values after one sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDraw {
    pub corr_loading: f64,
    pub noise_var: f64,
    pub vol: f64,
}

impl ParamDraw {
    fn of(state: &ChainState) -> Self {
        let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        Self {
            corr_loading: avg(&state.corr_loading),
            noise_var: avg(&state.noise_var),
            vol: avg(&state.vol),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvPosterior {
    /// Quadratic variation of the sampled path, one per post-burn-in sweep.
    pub iv_draws: Vec<f64>,
    /// Quadratic variation for every sweep, burn-in included.
    pub iv_trace: Vec<f64>,
    pub param_trace: Vec<ParamDraw>,
    /// HMC acceptance rate over post-burn-in sweeps.
    pub acceptance_rate: f64,
    pub hmc: HmcOutcome,
    /// Step size in force after the pilot.
    pub step_size: f64,
    pub paths: Option<Vec<Vec<f64>>>,
    pub final_state: ChainState,
}

impl IvPosterior {
    pub fn point_estimate(&self) -> f64 {
        mean(&self.iv_draws)
    }
}

/// Mean accumulated as offsets from the first draw, exact for constant input.
fn mean(x: &[f64]) -> f64 {
    let x0 = x[0];
    x0 + x.iter().map(|v| v - x0).sum::<f64>() / x.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvSummary {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

/// Posterior mean and central credible interval (linearly interpolated quantiles).
pub fn iv_point_and_interval(draws: &[f64], level: f64) -> Result<IvSummary> {
    if draws.is_empty() {
        return Err(Error::EmptyDraws);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput(format!("credible level must lie in (0, 1), got {level}")));
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = (sorted.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(sorted.len() - 1);
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    };
    let tail = 0.5 * (1.0 - level);
    Ok(IvSummary {
        estimate: mean(draws),
        lower: q(tail),
        upper: q(1.0 - tail),
        level,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOutcome {
    pub hmc: HmcOutcome,
    pub quadratic_variation: f64,
}

/// One Gibbs sweep: path, `B̃1`, `B̃2²`, then `b1`.
pub fn gibbs_sweep(
    state: &mut ChainState,
    xi: &[f64],
    prior: &PriorHyper,
    config: &McmcConfig,
    eps: f64,
    rng: &mut SimRng,
) -> Result<SweepOutcome> {
    state.theta = sample_theta(state, xi, config.initial_var, rng)?;
    Ok(update_params(state, xi, prior, config, eps, rng))
}

/// Parameter half of a sweep (`B̃1`, `B̃2²`, `b1`) given the current path.
pub fn update_params(
    state: &mut ChainState,
    xi: &[f64],
    prior: &PriorHyper,
    config: &McmcConfig,
    eps: f64,
    rng: &mut SimRng,
) -> SweepOutcome {
    let stats = block_stats(state, xi);
    if config.fixed_corr_loading.is_none() {
        sample_corr_loading(state, &stats, prior, rng);
    }
    sample_noise_var(state, &stats, prior, rng);
    let hmc = hmc_step_vol(
        state,
        &stats,
        prior,
        config.potential,
        eps,
        config.leapfrog_steps,
        config.vol_floor,
        rng,
    );
    SweepOutcome { hmc, quadratic_variation: state.quadratic_variation() }
}

fn initial_state(xi: &[f64], prior: &PriorHyper, config: &McmcConfig, rng: &mut SimRng) -> Result<ChainState> {
    let mut jitter = |x: f64| {
        if config.init_jitter > 0.0 {
            x * (config.init_jitter * rng.gaussian()).exp()
        } else {
            x
        }
    };
    let vol = jitter(prior.vol_mean.max(config.vol_floor)).max(config.vol_floor);
    let corr = match config.fixed_corr_loading {
        Some(c) => c,
        None => jitter(prior.corr_mean),
    };
    let noise = jitter(prior.noise_var_mean());
    let mut state = ChainState::uniform(vec![0.0; xi.len()], config.sharing, corr, noise, vol);
    let (means, _) = filter::scalar::run(|t| state.system(t), &xi[1..], xi[0], config.initial_var)?;
    state.theta = means;
    Ok(state)
}

fn initial_step_size(state: &ChainState, xi: &[f64], prior: &PriorHyper, config: &McmcConfig) -> f64 {
    let stats = block_stats(state, xi);
    let curv = stats
        .iter()
        .enumerate()
        .map(|(j, s)| VolTarget::new(state, j, *s, prior, config.potential).curvature(state.vol[j]))
        .fold(0.0_f64, f64::max);
    let curv = if curv.is_finite() && curv > 0.0 { curv } else { 1.0 / prior.vol_var };
    0.5 / curv.sqrt()
}

/// Runs the sampler on one day of log prices `ξ(0..T)`.
pub fn run_gibbs(xi: &[f64], prior: &PriorHyper, config: &McmcConfig) -> Result<IvPosterior> {
    config.validate()?;
    prior.validate()?;
    if xi.len() < 2 {
        return Err(Error::TooFewObservations { got: xi.len(), need: 2 });
    }
    if let Some(t) = xi.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite observation at index {t}")));
    }
    let mut rng = SimRng::seed_from(config.seed);
    let mut state = initial_state(xi, prior, config, &mut rng)?;
    let (mut eps, pilot) = match config.step_size {
        StepSize::Fixed(e) => (e, 0),
        StepSize::Auto => (
            initial_step_size(&state, xi, prior, config),
            config.pilot_iterations.min(config.burn_in),
        ),
    };

    let retained = config.iterations - config.burn_in;
    let mut iv_trace = Vec::with_capacity(config.iterations);
    let mut iv_draws = Vec::with_capacity(retained);
    let mut param_trace = Vec::with_capacity(config.iterations);
    let mut paths = config.keep_paths.then(|| Vec::with_capacity(retained));
    let mut hmc = HmcOutcome::default();
    for i in 0..config.iterations {
        let out = gibbs_sweep(&mut state, xi, prior, config, eps, &mut rng)?;
        if i < pilot {
            let gain = 1.0 / ((i + 1) as f64).sqrt();
            eps *= (gain * (out.hmc.rate() - config.target_acceptance)).exp();
        }
        iv_trace.push(out.quadratic_variation);
        param_trace.push(ParamDraw::of(&state));
        if i >= config.burn_in {
            hmc.merge(out.hmc);
            iv_draws.push(out.quadratic_variation);
            if let Some(p) = paths.as_mut() {
                p.push(state.theta.clone());
            }
        }
    }
    state.check(config.vol_floor)?;
    Ok(IvPosterior {
        iv_draws,
        iv_trace,
        param_trace,
        acceptance_rate: hmc.rate(),
        hmc,
        step_size: eps,
        paths,
        final_state: state,
    })
}
