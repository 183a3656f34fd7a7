//! One-step filtering recursions for conditionally Gaussian sequences.
//!
//! Given `θ(t) | ξ(0..t) ~ N(m, γ)` and the lagged-form coefficients, the next belief is
//!
//! ```text
//! m'  = a0 + a1 m + [b∘B + a1 γ A1ᵀ] [B∘B + A1 γ A1ᵀ]⁺ (ξ(t+1) − A0 − A1 m)
//! γ'  = a1 γ a1ᵀ + b∘b − [b∘B + a1 γ A1ᵀ] [B∘B + A1 γ A1ᵀ]⁺ [b∘B + a1 γ A1ᵀ]ᵀ
//! ```
//!
//! The innovation covariance is always pseudo-inverted, so exactly-degenerate
//! observations (`B∘B + A1 γ A1ᵀ` singular) are handled.

use crate::error::{Error, Result};
use crate::linalg::{self, pinv_psd, pinv_scalar, Mat, Vector, PINV_TOL};
use crate::model::{GaussianBelief, OriginalParams, ScalarSystem, SystemParams};

/// Belief at step `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub t: usize,
    pub belief: GaussianBelief,
}

impl FilterState {
    pub fn new(belief: GaussianBelief) -> Self {
        Self { t: 0, belief }
    }

    pub fn advance_original(&self, p: &OriginalParams, xi_next: &Vector) -> Result<FilterState> {
        let belief = step_original(&self.belief, p, xi_next, self.t + 1)?;
        Ok(FilterState {
            t: self.t + 1,
            belief,
        })
    }

    pub fn advance(&self, p: &SystemParams, xi_next: &Vector) -> Result<FilterState> {
        self.advance_original(&p.to_original()?, xi_next)
    }
}

/// One step of the recursion in lagged-observation form.
pub fn filter_step_original(
    belief: &GaussianBelief,
    p: &OriginalParams,
    xi_next: &Vector,
) -> Result<GaussianBelief> {
    step_original(belief, p, xi_next, 1)
}

/// One step for the contemporaneous-observation system; derives the lagged form first.
pub fn filter_step_reparam(
    belief: &GaussianBelief,
    p: &SystemParams,
    xi_next: &Vector,
) -> Result<GaussianBelief> {
    filter_step_original(belief, &p.to_original()?, xi_next)
}

fn step_original(
    belief: &GaussianBelief,
    p: &OriginalParams,
    xi_next: &Vector,
    step: usize,
) -> Result<GaussianBelief> {
    let (k, l) = p.dims();
    if belief.dim() != k || xi_next.len() != l {
        return Err(Error::DimensionMismatch(format!(
            "step {step}: belief dim {}, observation dim {}, system is ({k}, {l})",
            belief.dim(),
            xi_next.len()
        )));
    }
    let tr = &p.transition;
    let ob = &p.observation;
    let nc = p.noise_covariances();
    let m = &belief.mean;
    let g = &belief.cov;

    let gain_num: Mat = &nc.cross + &tr.coef * g * ob.coef.transpose();
    let innov_cov = linalg::symmetrize(&(&nc.obs + &ob.coef * g * ob.coef.transpose()));
    if !linalg::all_finite(&innov_cov) || !linalg::all_finite(&gain_num) {
        return Err(Error::NumericalFailure { step });
    }
    let innov_pinv = pinv_psd(&innov_cov, PINV_TOL)?;
    let innov = xi_next - &ob.offset - &ob.coef * m;

    let mean = &tr.offset + &tr.coef * m + &gain_num * &innov_pinv * innov;
    let cov = &tr.coef * g * tr.coef.transpose() + &nc.state
        - &gain_num * &innov_pinv * gain_num.transpose();
    let cov = linalg::symmetrize(&cov);

    if mean.iter().any(|v| !v.is_finite()) || !linalg::all_finite(&cov) {
        return Err(Error::NumericalFailure { step });
    }
    Ok(GaussianBelief { mean, cov })
}

/// Runs the recursion over a whole sequence; returns `T + 1` beliefs (the initial one first).
pub fn run_filter(
    p_seq: &[SystemParams],
    xi: &[Vector],
    init: &GaussianBelief,
) -> Result<Vec<GaussianBelief>> {
    if p_seq.len() != xi.len() {
        return Err(Error::LengthMismatch {
            params: p_seq.len(),
            observations: xi.len(),
        });
    }
    let mut out = Vec::with_capacity(xi.len() + 1);
    out.push(init.clone());
    let mut state = FilterState::new(init.clone());
    for (p, x) in p_seq.iter().zip(xi) {
        state = state.advance(p, x)?;
        out.push(state.belief.clone());
    }
    Ok(out)
}

/// Scalar fast path; agrees with the matrix path to rounding.
pub mod scalar {
    use super::*;

    #[inline]
    pub fn step(mean: f64, var: f64, s: &ScalarSystem, xi_next: f64) -> (f64, f64) {
        let (obs_offset, obs_coef, obs_b1, obs_b2) = s.derived();
        let state_var = s.b1 * s.b1 + s.b2 * s.b2;
        let cross = s.b1 * obs_b1 + s.b2 * obs_b2;
        let obs_var = obs_b1 * obs_b1 + obs_b2 * obs_b2;

        let gain_num = cross + s.a1 * var * obs_coef;
        let innov_pinv = pinv_scalar(obs_var + obs_coef * var * obs_coef);
        let innov = xi_next - obs_offset - obs_coef * mean;
        let m = s.a0 + s.a1 * mean + gain_num * innov_pinv * innov;
        let g = s.a1 * var * s.a1 + state_var - gain_num * innov_pinv * gain_num;
        (m, g)
    }

    /// Filter means and variances for `xi[0..T]` with params `params(t)` for step `t → t+1`.
    ///
    /// Returned vectors have length `T + 1`.
    pub fn run<F>(params: F, xi: &[f64], init_mean: f64, init_var: f64) -> Result<(Vec<f64>, Vec<f64>)>
    where
        F: Fn(usize) -> ScalarSystem,
    {
        let mut means = Vec::with_capacity(xi.len() + 1);
        let mut vars = Vec::with_capacity(xi.len() + 1);
        let (mut m, mut g) = (init_mean, init_var);
        means.push(m);
        vars.push(g);
        for (t, &x) in xi.iter().enumerate() {
            (m, g) = step(m, g, &params(t), x);
            if !m.is_finite() || !g.is_finite() {
                return Err(Error::NumericalFailure { step: t + 1 });
            }
            means.push(m);
            vars.push(g);
        }
        Ok((means, vars))
    }
}
