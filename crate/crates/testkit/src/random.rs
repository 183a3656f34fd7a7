//! Random system coefficients for oracle comparisons.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::joint::Step;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(r: usize, c: usize, lo: f64, hi: f64, g: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| g.random_range(lo..hi))
}

pub fn uniform_vector(n: usize, lo: f64, hi: f64, g: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| g.random_range(lo..hi))
}

/// `X Xᵀ + floor·I` with `X` uniform on `[−1, 1]`.
pub fn random_spd(n: usize, floor: f64, g: &mut impl Rng) -> DMatrix<f64> {
    let x = uniform_matrix(n, n, -1.0, 1.0, g);
    &x * x.transpose() + DMatrix::identity(n, n) * floor
}

/// Step with all coefficients uniform on `[−1, 1]`, transition coefficient scaled to
/// keep the state from exploding over short horizons.
pub fn random_step(k: usize, l: usize, g: &mut impl Rng) -> Step {
    Step {
        a0: uniform_vector(k, -1.0, 1.0, g),
        a1: uniform_matrix(k, k, -1.0, 1.0, g) * 0.8,
        b1: uniform_matrix(k, k, -1.0, 1.0, g),
        b2: uniform_matrix(k, l, -1.0, 1.0, g),
        c0: uniform_vector(l, -1.0, 1.0, g),
        c1: uniform_matrix(l, k, -1.0, 1.0, g),
        d1: uniform_matrix(l, k, -1.0, 1.0, g),
        d2: uniform_matrix(l, l, -1.0, 1.0, g),
    }
}

/// Scalar price-plus-noise step: `θ' = θ + vol·ε1`, `ξ' = θ' + corr·ε1 + noise·ε2`.
pub fn price_noise_step(vol: f64, corr: f64, noise: f64) -> Step {
    let s = |x: f64| DMatrix::from_element(1, 1, x);
    Step {
        a0: DVector::zeros(1),
        a1: s(1.0),
        b1: s(vol),
        b2: s(0.0),
        c0: DVector::zeros(1),
        c1: s(1.0),
        d1: s(corr),
        d2: s(noise),
    }
}
