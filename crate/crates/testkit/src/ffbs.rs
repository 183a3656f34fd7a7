//! Textbook forward-filtering backward-sampling with uncorrelated noises.

use nalgebra::{DMatrix, DVector};

fn pinv(x: &DMatrix<f64>) -> DMatrix<f64> {
    let scale = x.amax();
    if scale == 0.0 {
        return DMatrix::zeros(x.nrows(), x.ncols());
    }
    x.clone().pseudo_inverse(1e-13 * scale).expect("svd pseudo-inverse")
}

/// Kernel precision and linear term for the contemporaneous model
/// `θ' = a0 + a1 θ + b1 ε1`, `ξ' = c0 + c1 θ' + d2 ε2`.
///
/// Given `θ'`, the observation `ξ'` carries no extra information about `θ`, so only
/// the transition and the filter belief enter.
pub fn kernel_contemporaneous(
    a0: &DVector<f64>,
    a1: &DMatrix<f64>,
    b1: &DMatrix<f64>,
    m: &DVector<f64>,
    g: &DMatrix<f64>,
    theta_next: &DVector<f64>,
) -> (DMatrix<f64>, DVector<f64>) {
    let q = pinv(&(b1 * b1.transpose()));
    let gi = pinv(g);
    let v_inv = a1.transpose() * &q * a1 + &gi;
    let w = a1.transpose() * &q * (theta_next - a0) + &gi * m;
    (v_inv, w)
}

/// Kernel for the lagged model with independent noises,
/// `θ' = a0 + a1 θ + b1 ε1`, `ξ' = A0 + A1 θ + B2 ε2`:
/// `V⁻¹ = A1ᵀ (B2²)⁺ A1 + a1ᵀ (b1²)⁺ a1 + γ⁺`,
/// `W = A1ᵀ (B2²)⁺ (ξ' − A0) + a1ᵀ (b1²)⁺ (θ' − a0) + γ⁺ m`.
#[allow(clippy::too_many_arguments)]
pub fn kernel_lagged(
    a0: &DVector<f64>,
    a1: &DMatrix<f64>,
    b1: &DMatrix<f64>,
    obs0: &DVector<f64>,
    obs1: &DMatrix<f64>,
    obs_b2: &DMatrix<f64>,
    m: &DVector<f64>,
    g: &DMatrix<f64>,
    theta_next: &DVector<f64>,
    xi_next: &DVector<f64>,
) -> (DMatrix<f64>, DVector<f64>) {
    let q = pinv(&(b1 * b1.transpose()));
    let r = pinv(&(obs_b2 * obs_b2.transpose()));
    let gi = pinv(g);
    let v_inv = obs1.transpose() * &r * obs1 + a1.transpose() * &q * a1 + &gi;
    let w = obs1.transpose() * &r * (xi_next - obs0)
        + a1.transpose() * &q * (theta_next - a0)
        + &gi * m;
    (v_inv, w)
}

/// Scalar Kalman filter + backward sampler for `θ' = θ + σ ε1`, `ξ' = θ' + τ ε2`.
///
/// `xi[t]` is the observation at `t + 1`; `normals` supplies one standard normal per
/// state, consumed for `θ(T)` first and `θ(0)` last.
pub fn sample_random_walk(
    sigma: f64,
    tau: f64,
    m0: f64,
    g0: f64,
    xi: &[f64],
    normals: &mut dyn FnMut() -> f64,
) -> Vec<f64> {
    let n = xi.len();
    let mut m = vec![m0];
    let mut g = vec![g0];
    for &x in xi {
        let p = g.last().unwrap() + sigma * sigma;
        let k = p / (p + tau * tau);
        let mp = m.last().unwrap() + k * (x - m.last().unwrap());
        m.push(mp);
        g.push(p * (1.0 - k));
    }
    let mut th = vec![0.0; n + 1];
    th[n] = m[n] + g[n].max(0.0).sqrt() * normals();
    for t in (0..n).rev() {
        let (mean, var) = if g[t] > 0.0 {
            let prec = 1.0 / (sigma * sigma) + 1.0 / g[t];
            ((th[t + 1] / (sigma * sigma) + m[t] / g[t]) / prec, 1.0 / prec)
        } else {
            (m[t], 0.0)
        };
        th[t] = mean + var.sqrt() * normals();
    }
    th
}
