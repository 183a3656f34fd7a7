//! Seedable random stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::linalg::{Mat, Vector};

/// Deterministic stream of uniforms and standard Gaussians.
///
/// Streams are single-owner. Independent workers get their own stream via
/// [`SimRng::derive`], keyed by a stable identifier (day, chain, ...).
#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn seed_from(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for `(seed, key)`; does not consume from `self`.
    pub fn derive(seed: u64, key: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(key.wrapping_add(1));
        Self { inner }
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn gaussian_vector(&mut self, n: usize) -> Vector {
        Vector::from_fn(n, |_, _| self.gaussian())
    }

    /// Draw from `N(mean, L Lᵀ)` given a square-root factor `L`.
    pub fn gaussian_with_root(&mut self, mean: &Vector, root: &Mat) -> Vector {
        let z = self.gaussian_vector(mean.len());
        mean + root * z
    }

    /// Gamma draw with shape `shape` and rate `rate`.
    pub fn gamma(&mut self, shape: f64, rate: f64) -> f64 {
        Gamma::new(shape, 1.0 / rate)
            .expect("gamma parameters must be positive and finite")
            .sample(&mut self.inner)
    }

    /// Inverse-gamma draw `IG(shape, scale)`, i.e. `1 / Gamma(shape, rate = scale)`.
    pub fn inverse_gamma(&mut self, shape: f64, scale: f64) -> f64 {
        1.0 / self.gamma(shape, scale)
    }
}
