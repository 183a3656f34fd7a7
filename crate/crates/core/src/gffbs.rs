//! Generalized forward-filtering backward-sampling.
//!
//! When transition and observation noises share `ε1`, the observation `ξ(t+1)` still
//! depends on `θ(t)` after conditioning on `θ(t+1)`. The backward factor is then
//!
//! ```text
//! p(θ(t) | θ(t+1), ξ(0..T)) ∝ p(ξ(t+1) | θ(t+1), θ(t)) · p(θ(t+1) | θ(t)) · p(θ(t) | ξ(0..t))
//!                           ∝ N(V W, V)
//! ```
//!
//! with
//!
//! ```text
//! Σ    = B∘B − B∘b (b∘b)⁺ b∘B
//! H    = A1 − B∘b (b∘b)⁺ a1
//! V⁻¹  = Hᵀ Σ⁺ H + a1ᵀ (b∘b)⁺ a1 + γ⁺
//! W    = Hᵀ Σ⁺ (ξ(t+1) − A0 − B∘b (b∘b)⁺ (θ(t+1) − a0)) + a1ᵀ (b∘b)⁺ (θ(t+1) − a0) + γ⁺ m
//! ```
//!
//! The information form above is exact only when `γ(t)`, `b∘b` and `Σ` are all
//! nonsingular. When one of them is rank deficient (an anchored initial state with
//! `γ = 0`, a frozen state with `b = 0`, a noiseless observation with `Σ = 0`) the
//! pseudo-inverses silently discard hard constraints, so the draw is taken from the
//! same conditional written in covariance form instead. Both forms coincide
//! whenever the information form applies.

use crate::error::{Error, Result};
use crate::filter::{self, run_filter};
use crate::linalg::{
    self, pinv_psd, pinv_psd_with_floor, pinv_scalar, pinv_scalar_with_floor, psd_rank, psd_sqrt,
    Mat, Vector, PINV_TOL,
};
use crate::model::{GaussianBelief, OriginalParams, ScalarSystem, SystemParams};
use crate::rng::SimRng;

/// Which algebraic form produced the moments used for drawing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelForm {
    Information,
    Covariance,
}

/// Backward conditional `θ(t) | θ(t+1), ξ(t+1), ξ(0..t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardKernel {
    /// `V` as the pseudo-inverse of `V⁻¹`.
    pub v: Mat,
    pub v_inv: Mat,
    pub w: Vector,
    /// Conditional covariance of `ξ(t+1)` given `θ(t+1), θ(t)`.
    pub sigma: Mat,
    /// Moments used to draw `θ(t)`; equal to `(V W, V)` in the information form.
    pub mean: Vector,
    pub cov: Mat,
    pub form: KernelForm,
}

/// Computes the backward kernel for step `t` from the forward belief at `t`.
pub fn backward_kernel(
    p: &OriginalParams,
    belief_t: &GaussianBelief,
    theta_next: &Vector,
    xi_next: &Vector,
) -> Result<BackwardKernel> {
    kernel_at(p, belief_t, theta_next, xi_next, 0)
}

fn kernel_at(
    p: &OriginalParams,
    belief: &GaussianBelief,
    theta_next: &Vector,
    xi_next: &Vector,
    step: usize,
) -> Result<BackwardKernel> {
    let (k, l) = p.dims();
    if belief.dim() != k || theta_next.len() != k || xi_next.len() != l {
        return Err(Error::DimensionMismatch(format!(
            "backward step {step}: belief {}, θ {}, ξ {} for system ({k}, {l})",
            belief.dim(),
            theta_next.len(),
            xi_next.len()
        )));
    }
    let tr = &p.transition;
    let ob = &p.observation;
    let nc = p.noise_covariances();
    let obs_scale = nc.obs.trace().max(0.0);

    let state_pinv = pinv_psd(&nc.state, PINV_TOL)?;
    let proj = nc.cross.transpose() * &state_pinv; // B∘b (b∘b)⁺, l×k
    let sigma = linalg::symmetrize(&(&nc.obs - &proj * &nc.cross));
    let sigma_pinv = pinv_psd_with_floor(&sigma, PINV_TOL, obs_scale)?;
    let h = &ob.coef - &proj * &tr.coef;
    let gamma_pinv = pinv_psd(&belief.cov, PINV_TOL)?;

    let dtheta = theta_next - &tr.offset;
    let resid = xi_next - &ob.offset - &proj * &dtheta;
    let ht_sigma = h.transpose() * &sigma_pinv;
    let at_state = tr.coef.transpose() * &state_pinv;

    let v_inv = linalg::symmetrize(&(&ht_sigma * &h + &at_state * &tr.coef + &gamma_pinv));
    let w = &ht_sigma * resid + &at_state * &dtheta + &gamma_pinv * &belief.mean;
    if !linalg::all_finite(&v_inv) || w.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure { step });
    }
    let v = pinv_psd(&v_inv, PINV_TOL)?;

    let informative = psd_rank(&belief.cov, PINV_TOL, 0.0) == k
        && psd_rank(&nc.state, PINV_TOL, 0.0) == k
        && psd_rank(&sigma, PINV_TOL, obs_scale) == l;

    let (mean, cov, form) = if informative {
        if psd_rank(&v_inv, PINV_TOL, 0.0) < k {
            return Err(Error::DegenerateState {
                step,
                detail: "V⁻¹ is singular".into(),
            });
        }
        (&v * &w, v.clone(), KernelForm::Information)
    } else {
        let (mean, cov) = covariance_form(p, belief, theta_next, xi_next)?;
        (mean, cov, KernelForm::Covariance)
    };
    if mean.iter().any(|x| !x.is_finite()) || !linalg::all_finite(&cov) {
        return Err(Error::DegenerateState {
            step,
            detail: "non-finite backward moments".into(),
        });
    }
    Ok(BackwardKernel {
        v,
        v_inv,
        w,
        sigma,
        mean,
        cov,
        form,
    })
}

/// `θ(t) | (θ(t+1), ξ(t+1))` by Gaussian conditioning on the stacked one-step law
/// `[θ(t+1); ξ(t+1)] = [a0; A0] + [a1; A1] θ(t) + noise`, noise covariance `[[b∘b, b∘B], [B∘b, B∘B]]`.
fn covariance_form(
    p: &OriginalParams,
    belief: &GaussianBelief,
    theta_next: &Vector,
    xi_next: &Vector,
) -> Result<(Vector, Mat)> {
    let (k, l) = p.dims();
    let nc = p.noise_covariances();
    let mut hf = Mat::zeros(k + l, k);
    hf.view_mut((0, 0), (k, k)).copy_from(&p.transition.coef);
    hf.view_mut((k, 0), (l, k)).copy_from(&p.observation.coef);
    let mut offset = Vector::zeros(k + l);
    offset.rows_mut(0, k).copy_from(&p.transition.offset);
    offset.rows_mut(k, l).copy_from(&p.observation.offset);
    let mut y = Vector::zeros(k + l);
    y.rows_mut(0, k).copy_from(theta_next);
    y.rows_mut(k, l).copy_from(xi_next);
    let mut noise = Mat::zeros(k + l, k + l);
    noise.view_mut((0, 0), (k, k)).copy_from(&nc.state);
    noise.view_mut((0, k), (k, l)).copy_from(&nc.cross);
    noise.view_mut((k, 0), (l, k)).copy_from(&nc.cross.transpose());
    noise.view_mut((k, k), (l, l)).copy_from(&nc.obs);

    let g = &belief.cov;
    let s = linalg::symmetrize(&(&hf * g * hf.transpose() + noise));
    let gain = g * hf.transpose() * pinv_psd(&s, PINV_TOL)?;
    let mean = &belief.mean + &gain * (y - offset - &hf * &belief.mean);
    let cov = linalg::symmetrize(&(g - &gain * &hf * g));
    Ok((mean, cov))
}

/// Sampled latent trajectory `θ(0..T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPath {
    pub states: Vec<Vector>,
}

impl LatentPath {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// First coordinate of every state.
    pub fn first_coordinate(&self) -> Vec<f64> {
        self.states.iter().map(|s| s[0]).collect()
    }
}

fn draw(mean: &Vector, cov: &Mat, rng: &mut SimRng) -> Vector {
    rng.gaussian_with_root(mean, &psd_sqrt(cov))
}

/// Joint posterior draw of `θ(0..T)` given `ξ(1..T)` (and the initial belief about `θ(0)`).
///
/// Forward pass via [`run_filter`], `θ(T) ~ N(m(T), γ(T))`, then each `θ(t)` from its
/// backward kernel conditional on the already-drawn `θ(t+1)`.
pub fn sample_path(
    p_seq: &[SystemParams],
    xi: &[Vector],
    init: &GaussianBelief,
    rng: &mut SimRng,
) -> Result<LatentPath> {
    let beliefs = run_filter(p_seq, xi, init)?;
    let originals = p_seq
        .iter()
        .map(SystemParams::to_original)
        .collect::<Result<Vec<_>>>()?;
    let n = xi.len();
    let mut states = vec![Vector::zeros(init.dim()); n + 1];
    states[n] = draw(&beliefs[n].mean, &beliefs[n].cov, rng);
    for t in (0..n).rev() {
        let kern = kernel_at(&originals[t], &beliefs[t], &states[t + 1], &xi[t], t)?;
        states[t] = draw(&kern.mean, &kern.cov, rng);
    }
    Ok(LatentPath { states })
}

/// Scalar fast path.
pub mod scalar {
    use super::*;

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct ScalarKernel {
        pub v: f64,
        pub v_inv: f64,
        pub w: f64,
        pub sigma: f64,
        pub mean: f64,
        pub var: f64,
        pub form: KernelForm,
    }

    pub fn backward_kernel(
        s: &ScalarSystem,
        mean: f64,
        var: f64,
        theta_next: f64,
        xi_next: f64,
    ) -> Result<ScalarKernel> {
        kernel_at(s, mean, var, theta_next, xi_next, 0)
    }

    #[inline]
    pub(crate) fn kernel_at(
        s: &ScalarSystem,
        mean: f64,
        var: f64,
        theta_next: f64,
        xi_next: f64,
        step: usize,
    ) -> Result<ScalarKernel> {
        let (obs_offset, obs_coef, obs_b1, obs_b2) = s.derived();
        let state_var = s.b1 * s.b1 + s.b2 * s.b2;
        let cross = s.b1 * obs_b1 + s.b2 * obs_b2;
        let obs_var = obs_b1 * obs_b1 + obs_b2 * obs_b2;

        let state_pinv = pinv_scalar(state_var);
        let proj = cross * state_pinv;
        let sigma = obs_var - proj * cross;
        let sigma_pinv = pinv_scalar_with_floor(sigma, PINV_TOL, obs_var);
        let h = obs_coef - proj * s.a1;
        let gamma_pinv = pinv_scalar(var);
        let dtheta = theta_next - s.a0;
        let resid = xi_next - obs_offset - proj * dtheta;

        let v_inv = h * sigma_pinv * h + s.a1 * state_pinv * s.a1 + gamma_pinv;
        let w = h * sigma_pinv * resid + s.a1 * state_pinv * dtheta + gamma_pinv * mean;
        if !v_inv.is_finite() || !w.is_finite() {
            return Err(Error::NumericalFailure { step });
        }
        let v = pinv_scalar(v_inv);
        let informative = var > 0.0 && state_var > 0.0 && sigma_pinv > 0.0;
        let k = if informative {
            if v_inv <= 0.0 {
                return Err(Error::DegenerateState {
                    step,
                    detail: "V⁻¹ is singular".into(),
                });
            }
            ScalarKernel {
                v,
                v_inv,
                w,
                sigma,
                mean: v * w,
                var: v,
                form: KernelForm::Information,
            }
        } else {
            let p = s.to_params().to_original()?;
            let (m, c) = covariance_form(
                &p,
                &GaussianBelief::scalar(mean, var),
                &Vector::from_element(1, theta_next),
                &Vector::from_element(1, xi_next),
            )?;
            ScalarKernel {
                v,
                v_inv,
                w,
                sigma,
                mean: m[0],
                var: c[(0, 0)],
                form: KernelForm::Covariance,
            }
        };
        if !k.mean.is_finite() || !k.var.is_finite() {
            return Err(Error::DegenerateState {
                step,
                detail: "non-finite backward moments".into(),
            });
        }
        Ok(k)
    }

    /// Scalar path draw; `xi[t]` is the observation at `t + 1`. Returns `θ(0..T)`.
    ///
    /// Consumes one standard Gaussian per state, in the same order as the matrix path.
    pub fn sample_path<F>(
        params: F,
        xi: &[f64],
        init_mean: f64,
        init_var: f64,
        rng: &mut SimRng,
    ) -> Result<Vec<f64>>
    where
        F: Fn(usize) -> ScalarSystem,
    {
        let (means, vars) = filter::scalar::run(&params, xi, init_mean, init_var)?;
        let n = xi.len();
        let mut theta = vec![0.0; n + 1];
        theta[n] = means[n] + vars[n].max(0.0).sqrt() * rng.gaussian();
        for t in (0..n).rev() {
            let k = kernel_at(&params(t), means[t], vars[t], theta[t + 1], xi[t], t)?;
            theta[t] = k.mean + k.var.max(0.0).sqrt() * rng.gaussian();
        }
        Ok(theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v1(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    #[test]
    fn uncorrelated_price_noise_matches_textbook_ffbs() {
        let (vol, n, m, g, th, xi) = (0.3, 0.5, 0.1, 0.05, 0.25, 0.4);
        let p = SystemParams::price_noise(vol, 0.0, n).to_original().unwrap();
        let k = backward_kernel(&p, &GaussianBelief::scalar(m, g), &v1(th), &v1(xi)).unwrap();
        let r = g / (vol * vol + g);
        assert_eq!(k.form, KernelForm::Information);
        assert!((k.v[(0, 0)] - (1.0 - r) * g).abs() < 1e-15);
        assert!((k.mean[0] - ((1.0 - r) * m + r * th)).abs() < 1e-15);
    }

    #[test]
    fn anchored_state_is_recovered_exactly() {
        let p = SystemParams::price_noise(0.3, -0.1, 0.5).to_original().unwrap();
        let k = backward_kernel(&p, &GaussianBelief::scalar(1.25, 0.0), &v1(1.4), &v1(1.1)).unwrap();
        assert_eq!(k.form, KernelForm::Covariance);
        assert_eq!(k.mean[0], 1.25);
        assert_eq!(k.cov[(0, 0)], 0.0);
    }

    #[test]
    fn frozen_state_copies_next_value() {
        // vol = 0: θ(t+1) = θ(t) exactly, whatever the filter says.
        let p = SystemParams::price_noise(0.0, 0.2, 0.5).to_original().unwrap();
        let k = backward_kernel(&p, &GaussianBelief::scalar(0.0, 0.3), &v1(0.8), &v1(0.9)).unwrap();
        assert_eq!(k.form, KernelForm::Covariance);
        assert!((k.mean[0] - 0.8).abs() < 1e-14);
        assert!(k.cov[(0, 0)].abs() < 1e-14);
    }

    #[test]
    fn deterministic_path() {
        let p = vec![SystemParams::price_noise(0.0, 0.4, 0.6); 5];
        let xi: Vec<Vector> = (1..=5).map(|i| v1(i as f64 * 0.1)).collect();
        let mut rng = SimRng::seed_from(3);
        let path = sample_path(&p, &xi, &GaussianBelief::scalar(0.5, 0.0), &mut rng).unwrap();
        let means = run_filter(&p, &xi, &GaussianBelief::scalar(0.5, 0.0)).unwrap();
        for (s, b) in path.states.iter().zip(&means) {
            assert_eq!(s[0], b.mean[0]);
        }
    }

    #[test]
    fn scalar_kernel_matches_matrix_kernel() {
        let s = ScalarSystem {
            a0: 0.1,
            a1: 0.9,
            b1: 0.4,
            b2: 0.2,
            obs_offset: 0.3,
            obs_coef: 1.2,
            obs_shock1: -0.25,
            obs_shock2: 0.5,
        };
        let p = s.to_params().to_original().unwrap();
        for &(m, g) in &[(0.2, 0.3), (0.2, 0.0)] {
            let km = backward_kernel(&p, &GaussianBelief::scalar(m, g), &v1(0.7), &v1(1.1)).unwrap();
            let ks = scalar::backward_kernel(&s, m, g, 0.7, 1.1).unwrap();
            assert_eq!(km.form, ks.form);
            assert!((km.mean[0] - ks.mean).abs() < 1e-13);
            assert!((km.cov[(0, 0)] - ks.var).abs() < 1e-13);
            assert!((km.v_inv[(0, 0)] - ks.v_inv).abs() < 1e-12 * ks.v_inv.abs().max(1.0));
        }
    }

    #[test]
    fn scalar_sampler_matches_matrix_sampler() {
        let s = ScalarSystem::price_noise(0.3, -0.15, 0.4);
        let xi: Vec<f64> = (0..40).map(|i| (i as f64 * 0.21).cos()).collect();
        let mut r1 = SimRng::seed_from(11);
        let mut r2 = SimRng::seed_from(11);
        let a = scalar::sample_path(|_| s, &xi, 1.0, 0.0, &mut r1).unwrap();
        let p = vec![s.to_params(); xi.len()];
        let xv: Vec<Vector> = xi.iter().map(|&x| v1(x)).collect();
        let b = sample_path(&p, &xv, &GaussianBelief::scalar(1.0, 0.0), &mut r2).unwrap();
        for (x, y) in a.iter().zip(b.first_coordinate()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn seed_determinism() {
        let p = vec![SystemParams::price_noise(0.3, 0.1, 0.4); 10];
        let xi: Vec<Vector> = (0..10).map(|i| v1(i as f64 * 0.05)).collect();
        let init = GaussianBelief::scalar(0.0, 0.2);
        let a = sample_path(&p, &xi, &init, &mut SimRng::seed_from(5)).unwrap();
        let b = sample_path(&p, &xi, &init, &mut SimRng::seed_from(5)).unwrap();
        assert_eq!(a, b);
    }
}
