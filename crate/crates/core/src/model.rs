//! Parameter containers for the state/observation system and the filtering belief.
//!
//! The state evolves as `θ(t+1) = a0 + a1 θ(t) + b1 ε1(t+1) + b2 ε2(t+1)`.
//! Observations come in two equivalent forms:
//!
//! * contemporaneous (what users write down): `ξ(t+1) = Ã0 + Ã1 θ(t+1) + B̃1 ε1 + B̃2 ε2`,
//!   held in [`SystemParams`];
//! * lagged (what the filter recursions consume): `ξ(t+1) = A0 + A1 θ(t) + B1 ε1 + B2 ε2`,
//!   held in [`OriginalParams`] and obtained through [`derive_original`].
//!
//! `ε1` has the state dimension `k`, `ε2` the observation dimension `l`.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};

/// One affine equation driven by the two Gaussian shocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub offset: Vector,
    pub coef: Mat,
    /// Loading on `ε1` (k-dimensional shock).
    pub shock1: Mat,
    /// Loading on `ε2` (l-dimensional shock).
    pub shock2: Mat,
}

impl Equation {
    pub fn new(offset: Vector, coef: Mat, shock1: Mat, shock2: Mat) -> Self {
        Self {
            offset,
            coef,
            shock1,
            shock2,
        }
    }

    fn check(&self, rows: usize, k: usize, l: usize, name: &str) -> Result<()> {
        let dims = [
            ("offset", self.offset.len(), 1, rows, 1),
            ("coef", self.coef.nrows(), self.coef.ncols(), rows, k),
            ("shock1", self.shock1.nrows(), self.shock1.ncols(), rows, k),
            ("shock2", self.shock2.nrows(), self.shock2.ncols(), rows, l),
        ];
        for (field, r, c, er, ec) in dims {
            if r != er || c != ec {
                return Err(Error::DimensionMismatch(format!(
                    "{name}.{field} is {r}x{c}, expected {er}x{ec}"
                )));
            }
        }
        let finite = self.offset.iter().all(|v| v.is_finite())
            && linalg::all_finite(&self.coef)
            && linalg::all_finite(&self.shock1)
            && linalg::all_finite(&self.shock2);
        if !finite {
            return Err(Error::InvalidInput(format!("{name} has non-finite entries")));
        }
        Ok(())
    }
}

/// Time-`t` coefficients of the contemporaneous-observation system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub transition: Equation,
    pub observation: Equation,
}

impl SystemParams {
    pub fn new(transition: Equation, observation: Equation) -> Result<Self> {
        let p = Self {
            transition,
            observation,
        };
        p.validate()?;
        Ok(p)
    }

    /// `(k, l)`: state and observation dimensions.
    pub fn dims(&self) -> (usize, usize) {
        (self.transition.offset.len(), self.observation.offset.len())
    }

    pub fn validate(&self) -> Result<()> {
        let (k, l) = self.dims();
        self.transition.check(k, k, l, "transition")?;
        self.observation.check(l, k, l, "observation")
    }

    /// Scalar system from its eight coefficients.
    #[allow(clippy::too_many_arguments)]
    pub fn scalar(
        a0: f64,
        a1: f64,
        b1: f64,
        b2: f64,
        obs_offset: f64,
        obs_coef: f64,
        obs_shock1: f64,
        obs_shock2: f64,
    ) -> Self {
        let s = |v: f64| Mat::from_element(1, 1, v);
        Self {
            transition: Equation::new(Vector::from_element(1, a0), s(a1), s(b1), s(b2)),
            observation: Equation::new(
                Vector::from_element(1, obs_offset),
                s(obs_coef),
                s(obs_shock1),
                s(obs_shock2),
            ),
        }
    }

    /// Random-walk latent price observed with noise correlated with its returns:
    /// `θ(t+1) = θ(t) + vol·ε1`, `ξ(t+1) = θ(t+1) + corr_loading·ε1 + noise_sd·ε2`.
    pub fn price_noise(vol: f64, corr_loading: f64, noise_sd: f64) -> Self {
        Self::scalar(0.0, 1.0, vol, 0.0, 0.0, 1.0, corr_loading, noise_sd)
    }

    pub fn to_original(&self) -> Result<OriginalParams> {
        Ok(OriginalParams {
            transition: self.transition.clone(),
            observation: derive_original(self)?,
        })
    }

    pub fn as_scalar(&self) -> Option<ScalarSystem> {
        if self.dims() != (1, 1) {
            return None;
        }
        let t = &self.transition;
        let o = &self.observation;
        Some(ScalarSystem {
            a0: t.offset[0],
            a1: t.coef[(0, 0)],
            b1: t.shock1[(0, 0)],
            b2: t.shock2[(0, 0)],
            obs_offset: o.offset[0],
            obs_coef: o.coef[(0, 0)],
            obs_shock1: o.shock1[(0, 0)],
            obs_shock2: o.shock2[(0, 0)],
        })
    }
}

/// Lagged-form observation coefficients `(A0, A1, B1, B2)`.
pub type DerivedParams = Equation;

/// Coefficients in the lagged-observation form consumed by the filter.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginalParams {
    pub transition: Equation,
    pub observation: DerivedParams,
}

impl OriginalParams {
    pub fn new(transition: Equation, observation: DerivedParams) -> Result<Self> {
        let p = Self {
            transition,
            observation,
        };
        let (k, l) = p.dims();
        p.transition.check(k, k, l, "transition")?;
        p.observation.check(l, k, l, "observation")?;
        Ok(p)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.transition.offset.len(), self.observation.offset.len())
    }

    /// The three noise covariance blocks `b∘b`, `b∘B`, `B∘B`.
    pub fn noise_covariances(&self) -> NoiseCovariances {
        let b1 = &self.transition.shock1;
        let b2 = &self.transition.shock2;
        let c1 = &self.observation.shock1;
        let c2 = &self.observation.shock2;
        NoiseCovariances {
            state: linalg::symmetrize(&(b1 * b1.transpose() + b2 * b2.transpose())),
            cross: b1 * c1.transpose() + b2 * c2.transpose(),
            obs: linalg::symmetrize(&(c1 * c1.transpose() + c2 * c2.transpose())),
        }
    }
}

/// Joint covariance of the one-step transition and observation noises.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCovariances {
    /// `b∘b = b1 b1ᵀ + b2 b2ᵀ` (k×k)
    pub state: Mat,
    /// `b∘B = b1 B1ᵀ + b2 B2ᵀ` (k×l)
    pub cross: Mat,
    /// `B∘B = B1 B1ᵀ + B2 B2ᵀ` (l×l)
    pub obs: Mat,
}

/// Maps contemporaneous observation coefficients to the lagged form:
/// `A0 = Ã0 + Ã1 a0`, `A1 = Ã1 a1`, `B1 = Ã1 b1 + B̃1`, `B2 = Ã1 b2 + B̃2`.
pub fn derive_original(p: &SystemParams) -> Result<DerivedParams> {
    p.validate()?;
    let t = &p.transition;
    let o = &p.observation;
    Ok(Equation {
        offset: &o.offset + &o.coef * &t.offset,
        coef: &o.coef * &t.coef,
        shock1: &o.coef * &t.shock1 + &o.shock1,
        shock2: &o.coef * &t.shock2 + &o.shock2,
    })
}

/// Scalar (k = l = 1) system; the fast path used by the price/noise model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSystem {
    pub a0: f64,
    pub a1: f64,
    pub b1: f64,
    pub b2: f64,
    pub obs_offset: f64,
    pub obs_coef: f64,
    pub obs_shock1: f64,
    pub obs_shock2: f64,
}

impl ScalarSystem {
    pub fn price_noise(vol: f64, corr_loading: f64, noise_sd: f64) -> Self {
        Self {
            a0: 0.0,
            a1: 1.0,
            b1: vol,
            b2: 0.0,
            obs_offset: 0.0,
            obs_coef: 1.0,
            obs_shock1: corr_loading,
            obs_shock2: noise_sd,
        }
    }

    pub fn to_params(&self) -> SystemParams {
        SystemParams::scalar(
            self.a0,
            self.a1,
            self.b1,
            self.b2,
            self.obs_offset,
            self.obs_coef,
            self.obs_shock1,
            self.obs_shock2,
        )
    }

    /// Lagged-form `(A0, A1, B1, B2)`.
    #[inline]
    pub fn derived(&self) -> (f64, f64, f64, f64) {
        (
            self.obs_offset + self.obs_coef * self.a0,
            self.obs_coef * self.a1,
            self.obs_coef * self.b1 + self.obs_shock1,
            self.obs_coef * self.b2 + self.obs_shock2,
        )
    }
}

/// Conditional law `θ(t) | ξ(0..t) ~ N(mean, cov)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBelief {
    pub mean: Vector,
    pub cov: Mat,
}

impl GaussianBelief {
    pub fn new(mean: Vector, cov: Mat) -> Result<Self> {
        if cov.nrows() != mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "belief mean has length {}, covariance is {}x{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        linalg::check_symmetric(&cov)?;
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("belief mean is not finite".into()));
        }
        Ok(Self { mean, cov })
    }

    pub fn scalar(mean: f64, var: f64) -> Self {
        Self {
            mean: Vector::from_element(1, mean),
            cov: Mat::from_element(1, 1, var),
        }
    }

    /// Anchored at a known level: `N(level, 0)`.
    pub fn point(level: Vector) -> Self {
        let k = level.len();
        Self {
            mean: level,
            cov: Mat::zeros(k, k),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// PSD check used in tests: `λ_min ≥ −1e-10·trace`.
    pub fn is_psd(&self) -> bool {
        let tr = self.cov.trace().abs();
        linalg::min_eigenvalue(&self.cov) >= -1e-10 * tr.max(f64::MIN_POSITIVE)
    }
}
