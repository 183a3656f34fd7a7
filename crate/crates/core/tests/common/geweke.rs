use cgseq::iv::{draw_from_prior, draw_observations, sample_theta, update_params, ChainState, McmcConfig, ParamSharing, PriorHyper};
use cgseq::SimRng;

pub struct GewekeTrace {
    pub corr_loading: Vec<f64>,
    pub noise_var: Vec<f64>,
    pub vol: Vec<f64>,
    /// Middle path increment over `vol`, standard normal under the prior.
    pub standardized_increment: Vec<f64>,
}

/// Step size from the current path only (valid for the `vol` update, which conditions on it).
fn step_from_path(state: &ChainState, prior: &PriorHyper) -> f64 {
    let n = state.steps() as f64;
    let per_block = n / state.blocks() as f64;
    let qv = state.quadratic_variation().max(1e-300);
    let vol2 = qv / n;
    0.5 / (1.0 / prior.vol_var + 2.0 * per_block / vol2).sqrt()
}

/// Successive-conditional simulator: alternate one Gibbs sweep with a fresh data draw.
pub fn geweke(prior: &PriorHyper, sharing: ParamSharing, steps: usize, sweeps: usize, seed: u64) -> GewekeTrace {
    let cfg = McmcConfig { sharing, ..Default::default() };
    let mut rng = SimRng::seed_from(seed);
    let mut state = draw_from_prior(prior, steps, sharing, cfg.vol_floor, 0.0, &mut rng).unwrap();
    let mut xi = draw_observations(&state, &mut rng);
    let mut out = GewekeTrace {
        corr_loading: Vec::with_capacity(sweeps),
        noise_var: Vec::with_capacity(sweeps),
        vol: Vec::with_capacity(sweeps),
        standardized_increment: Vec::with_capacity(sweeps),
    };
    for _ in 0..sweeps {
        state.theta = sample_theta(&state, &xi, cfg.initial_var, &mut rng).unwrap();
        let eps = step_from_path(&state, prior);
        update_params(&mut state, &xi, prior, &cfg, eps, &mut rng);
        xi = draw_observations(&state, &mut rng);
        out.corr_loading.push(state.corr_loading[0]);
        out.noise_var.push(state.noise_var[0]);
        out.vol.push(state.vol[0]);
        let t = state.steps() / 2;
        let j = state.block_of(t);
        out.standardized_increment.push((state.theta[t + 1] - state.theta[t]) / state.vol[j]);
    }
    out
}

pub fn thin(x: &[f64], every: usize) -> Vec<f64> {
    x.iter().step_by(every.max(1)).copied().collect()
}
