//! Hamiltonian update of the return volatility `b1` with unit mass.

use crate::rng::SimRng;

use super::{BlockStats, ChainState, PriorHyper};

/// Which terms of the conditional enter the potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmcPotential {
    /// Prior, observation likelihood and the state-transition density of the path.
    Full,
    /// Prior and observation likelihood only.
    ObservationOnly,
}

/// Negative log conditional density of one block's `b1`, up to a constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolTarget {
    pub prior_mean: f64,
    pub prior_var: f64,
    pub corr_loading: f64,
    pub noise_var: f64,
    pub stats: BlockStats,
    pub potential: HmcPotential,
}

impl VolTarget {
    pub fn new(state: &ChainState, j: usize, stats: BlockStats, prior: &PriorHyper, potential: HmcPotential) -> Self {
        Self {
            prior_mean: prior.vol_mean,
            prior_var: prior.vol_var,
            corr_loading: state.corr_loading[j],
            noise_var: state.noise_var[j],
            stats,
            potential,
        }
    }

    pub fn energy(&self, b: f64) -> f64 {
        let s = &self.stats;
        let c = self.corr_loading;
        let mut u = (b - self.prior_mean).powi(2) / (2.0 * self.prior_var)
            + s.residual_ss(c / b) / (2.0 * self.noise_var);
        if self.potential == HmcPotential::Full {
            u += s.s_dd / (2.0 * b * b) + s.n as f64 * b.ln();
        }
        u
    }

    pub fn gradient(&self, b: f64) -> f64 {
        let s = &self.stats;
        let c = self.corr_loading;
        let b2 = b * b;
        let b3 = b2 * b;
        let mut g = (b - self.prior_mean) / self.prior_var
            + (c * s.s_ed / b2 - c * c * s.s_dd / b3) / self.noise_var;
        if self.potential == HmcPotential::Full {
            g += -s.s_dd / b3 + s.n as f64 / b;
        }
        g
    }

    /// Curvature by central difference, used to pick an initial step size.
    pub fn curvature(&self, b: f64) -> f64 {
        let h = 1e-4 * b.abs().max(1e-300);
        (self.gradient(b + h) - self.gradient(b - h)) / (2.0 * h)
    }
}

/// `steps` leapfrog steps of size `eps` from `(position, momentum)`.
pub fn leapfrog(
    mut position: f64,
    mut momentum: f64,
    eps: f64,
    steps: usize,
    grad: impl Fn(f64) -> f64,
) -> (f64, f64) {
    momentum -= 0.5 * eps * grad(position);
    for i in 0..steps {
        position += eps * momentum;
        if i + 1 < steps {
            momentum -= eps * grad(position);
        }
    }
    momentum -= 0.5 * eps * grad(position);
    (position, momentum)
}

/// Log acceptance ratio of the move `(b, p) → (b*, p*)`; `None` if the proposal is
/// unusable (non-finite, or below `floor`).
pub fn log_acceptance(target: &VolTarget, b: f64, p: f64, b_new: f64, p_new: f64, floor: f64) -> Option<f64> {
    if !(b_new.is_finite() && p_new.is_finite()) || b_new < floor {
        return None;
    }
    let la = target.energy(b) - target.energy(b_new) + 0.5 * p * p - 0.5 * p_new * p_new;
    la.is_finite().then_some(la)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HmcOutcome {
    pub proposals: usize,
    pub accepted: usize,
    pub below_floor: usize,
    pub nonfinite: usize,
}

impl HmcOutcome {
    pub fn merge(&mut self, other: HmcOutcome) {
        self.proposals += other.proposals;
        self.accepted += other.accepted;
        self.below_floor += other.below_floor;
        self.nonfinite += other.nonfinite;
    }

    pub fn rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

/// One HMC transition for every block's `b1`.
#[allow(clippy::too_many_arguments)]
pub fn hmc_step_vol(
    state: &mut ChainState,
    stats: &[BlockStats],
    prior: &PriorHyper,
    potential: HmcPotential,
    eps: f64,
    leapfrog_steps: usize,
    floor: f64,
    rng: &mut SimRng,
) -> HmcOutcome {
    let mut out = HmcOutcome::default();
    for (j, s) in stats.iter().enumerate() {
        let target = VolTarget::new(state, j, *s, prior, potential);
        let b = state.vol[j];
        let p = rng.gaussian();
        let u = rng.uniform();
        let (b_new, p_new) = leapfrog(b, p, eps, leapfrog_steps, |x| target.gradient(x));
        out.proposals += 1;
        if b_new.is_finite() && b_new < floor {
            out.below_floor += 1;
            continue;
        }
        match log_acceptance(&target, b, p, b_new, p_new, floor) {
            None => out.nonfinite += 1,
            Some(la) => {
                if u.ln() < la {
                    state.vol[j] = b_new;
                    out.accepted += 1;
                }
            }
        }
    }
    out
}
