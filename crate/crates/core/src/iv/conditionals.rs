use crate::error::{Error, Result};
use crate::gffbs;
use crate::rng::SimRng;

use super::{ChainState, PriorHyper};

/// Sufficient statistics of one parameter block given the path and observations,
/// with `e(t) = ξ(t+1) − θ(t+1)` and `d(t) = θ(t+1) − θ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlockStats {
    pub n: usize,
    pub s_ee: f64,
    pub s_ed: f64,
    pub s_dd: f64,
}

impl BlockStats {
    /// `Σ (e − k·d)²`.
    #[inline]
    pub fn residual_ss(&self, k: f64) -> f64 {
        (self.s_ee - 2.0 * k * self.s_ed + k * k * self.s_dd).max(0.0)
    }
}

pub fn block_stats(state: &ChainState, xi: &[f64]) -> Vec<BlockStats> {
    let mut out = vec![BlockStats::default(); state.blocks()];
    let th = &state.theta;
    for t in 0..state.steps() {
        let e = xi[t + 1] - th[t + 1];
        let d = th[t + 1] - th[t];
        let s = &mut out[state.block_of(t)];
        s.n += 1;
        s.s_ee += e * e;
        s.s_ed += e * d;
        s.s_dd += d * d;
    }
    out
}

/// Draws `θ(0..T)` given the parameters. `xi` holds `ξ(0..T)`; the initial belief is
/// `N(ξ(0), initial_var)`.
pub fn sample_theta(state: &ChainState, xi: &[f64], initial_var: f64, rng: &mut SimRng) -> Result<Vec<f64>> {
    if xi.len() != state.theta.len() {
        return Err(Error::LengthMismatch { params: state.theta.len(), observations: xi.len() });
    }
    gffbs::scalar::sample_path(|t| state.system(t), &xi[1..], xi[0], initial_var, rng)
}

/// Conjugate Gaussian draw of `B̃1` for every block.
pub fn sample_corr_loading(
    state: &mut ChainState,
    stats: &[BlockStats],
    prior: &PriorHyper,
    rng: &mut SimRng,
) {
    for (j, s) in stats.iter().enumerate() {
        let b = state.vol[j];
        let nv = state.noise_var[j];
        let prec = 1.0 / prior.corr_var + s.s_dd / (b * b * nv);
        let mean = (prior.corr_mean / prior.corr_var + s.s_ed / (b * nv)) / prec;
        state.corr_loading[j] = mean + rng.gaussian() / prec.sqrt();
    }
}

/// Conjugate inverse-gamma draw of `B̃2²` for every block.
pub fn sample_noise_var(
    state: &mut ChainState,
    stats: &[BlockStats],
    prior: &PriorHyper,
    rng: &mut SimRng,
) {
    for (j, s) in stats.iter().enumerate() {
        let k = state.corr_loading[j] / state.vol[j];
        let shape = prior.noise_shape + 0.5 * s.n as f64;
        let scale = prior.noise_scale + 0.5 * s.residual_ss(k);
        state.noise_var[j] = rng.inverse_gamma(shape, scale);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iv::ParamSharing;

    #[test]
    fn residual_ss_matches_direct_sum() {
        let theta = vec![0.0, 0.3, -0.1, 0.2];
        let xi = vec![0.0, 0.5, 0.1, 0.1];
        let st = ChainState::uniform(theta.clone(), ParamSharing::Shared, 0.2, 0.1, 0.5);
        let s = block_stats(&st, &xi)[0];
        let k = 0.2 / 0.5;
        let direct: f64 = (0..3)
            .map(|t| {
                let r = xi[t + 1] - theta[t + 1] - k * (theta[t + 1] - theta[t]);
                r * r
            })
            .sum();
        assert!((s.residual_ss(k) - direct).abs() < 1e-15);
        assert_eq!(s.n, 3);
    }

    #[test]
    fn per_step_blocks_hold_one_step_each() {
        let st = ChainState::uniform(vec![0.0, 1.0, 3.0], ParamSharing::PerStep, 0.0, 1.0, 1.0);
        let s = block_stats(&st, &[0.0, 1.0, 3.0]);
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].s_dd, 4.0);
        assert_eq!(s[1].s_ee, 0.0);
    }

    #[test]
    fn theta_length_mismatch_is_rejected() {
        let st = ChainState::uniform(vec![0.0; 4], ParamSharing::Shared, 0.0, 1.0, 1.0);
        let mut rng = SimRng::seed_from(1);
        assert!(matches!(
            sample_theta(&st, &[0.0; 3], 0.0, &mut rng),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
