//! Steady-state filter variances and the sign of the bias incurred by ignoring
//! correlation between noise and returns.

use crate::error::{Error, Result};

/// Trading days per year used for annualization.
pub const TRADING_DAYS: f64 = 252.0;
/// Steps per day of one-second data over a 6.5 hour session.
pub const ONE_SECOND_STEPS: usize = 23_400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    PerStep,
    /// Standard deviations scaled by `√(252 · steps_per_day)`.
    Annualized { steps_per_day: usize },
}

/// Constant-in-time parameters of the price-plus-noise system: return volatility `b1`,
/// correlated noise loading `B̃1`, idiosyncratic noise sd `B̃2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyParams {
    pub b1: f64,
    pub b1_tilde: f64,
    pub b2_tilde: f64,
    pub units: Units,
}

impl SteadyParams {
    pub fn new(b1: f64, b1_tilde: f64, b2_tilde: f64, units: Units) -> Result<Self> {
        let p = Self { b1, b1_tilde, b2_tilde, units };
        p.validate()?;
        Ok(p)
    }

    /// Parameters implied by a return variance, noise-to-signal ratio and correlation:
    /// `B̃2 = √((1−ρ²)·b1²·nts)`, `B̃1 = sgn(ρ)·√(ρ²·b1²·nts)`.
    pub fn from_design(return_var: f64, nts: f64, rho: f64, units: Units) -> Result<Self> {
        if !(return_var > 0.0 && nts > 0.0 && rho.abs() < 1.0) {
            return Err(Error::InvalidInput(format!(
                "need return_var > 0, nts > 0, |rho| < 1; got {return_var}, {nts}, {rho}"
            )));
        }
        let b1 = return_var.sqrt();
        let b2_tilde = ((1.0 - rho * rho) * return_var * nts).sqrt();
        let b1_tilde = rho.signum() * (rho * rho * return_var * nts).sqrt();
        let b1_tilde = if rho == 0.0 { 0.0 } else { b1_tilde };
        Self::new(b1, b1_tilde, b2_tilde, units)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b2_tilde > 0.0) || !self.b1.is_finite() || !self.b1_tilde.is_finite() || !self.b2_tilde.is_finite() {
            return Err(Error::InvalidInput(format!("invalid steady parameters {self:?}")));
        }
        if let Units::Annualized { steps_per_day } = self.units {
            if steps_per_day == 0 {
                return Err(Error::InvalidInput("steps per day must be positive".into()));
            }
        }
        Ok(())
    }

    fn scale_to_annual(units: Units) -> f64 {
        match units {
            Units::PerStep => 1.0,
            Units::Annualized { steps_per_day } => annualization_factor(steps_per_day),
        }
    }

    /// Same parameters expressed in `units`.
    pub fn in_units(&self, units: Units) -> Self {
        let f = Self::scale_to_annual(units) / Self::scale_to_annual(self.units);
        Self { b1: self.b1 * f, b1_tilde: self.b1_tilde * f, b2_tilde: self.b2_tilde * f, units }
    }
}

/// Factor converting a per-step standard deviation to an annualized one.
pub fn annualization_factor(steps_per_day: usize) -> f64 {
    (TRADING_DAYS * steps_per_day as f64).sqrt()
}

/// Per-step return volatility for an annualized return variance.
pub fn per_step_vol(annual_var: f64, steps_per_day: usize) -> f64 {
    (annual_var / (TRADING_DAYS * steps_per_day as f64)).sqrt()
}

/// Limit of the filtering variance recursion, `½(√(c² + 4b1²B̃2²) − c)` with
/// `c = b1² + 2b1B̃1`. Expressed in the squared units of `p`.
pub fn gamma_star(p: &SteadyParams) -> f64 {
    let (b, bt, n) = (p.b1, p.b1_tilde, p.b2_tilde);
    let c = b * b + 2.0 * b * bt;
    let d = 4.0 * b * b * n * n;
    let root = (c * c + d).sqrt();
    // Rationalised form for c > 0 avoids cancellation.
    if c > 0.0 {
        0.5 * d / (root + c)
    } else {
        0.5 * (root - c)
    }
}

/// `gamma_star` with `B̃1 = 0`.
pub fn gamma0_star(p: &SteadyParams) -> f64 {
    gamma_star(&SteadyParams { b1_tilde: 0.0, ..*p })
}

/// One step of the scalar filtering variance recursion.
pub fn variance_step(p: &SteadyParams, g: f64) -> f64 {
    let (b, bt, n) = (p.b1, p.b1_tilde, p.b2_tilde);
    let s_theta = g + b * b;
    let cross = g + b * (b + bt);
    let s_xi = g + (b + bt).powi(2) + n * n;
    s_theta - cross * cross / s_xi
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasSign {
    Negative,
    Positive,
    Boundary,
}

impl BiasSign {
    pub fn label(&self) -> &'static str {
        match self {
            BiasSign::Negative => "negative",
            BiasSign::Positive => "positive",
            BiasSign::Boundary => "boundary",
        }
    }
}

/// Sides of the bias inequality:
/// `LHS = B̃1⁴/b1² + 2B̃1³/b1`, `RHS = (s/b1)·B̃1² + (b1 + s)·B̃1`, `s = √(b1² + 4B̃2²)`.
pub fn bias_sides(b1: f64, b2_tilde: f64, b1_tilde: f64) -> (f64, f64) {
    let s = (b1 * b1 + 4.0 * b2_tilde * b2_tilde).sqrt();
    let x = b1_tilde;
    let lhs = x.powi(4) / (b1 * b1) + 2.0 * x.powi(3) / b1;
    let rhs = s / b1 * x * x + (b1 + s) * x;
    (lhs, rhs)
}

const BOUNDARY_TOL: f64 = 1e-14;

fn classify(lhs: f64, rhs: f64) -> BiasSign {
    let diff = lhs - rhs;
    if diff.abs() <= BOUNDARY_TOL * lhs.abs().max(rhs.abs()) {
        BiasSign::Boundary
    } else if diff > 0.0 {
        BiasSign::Negative
    } else {
        BiasSign::Positive
    }
}

/// Negative when `LHS > RHS`, positive when `LHS < RHS`.
pub fn bias_sign(p: &SteadyParams) -> Result<BiasSign> {
    if p.b1 == 0.0 {
        return Err(Error::InvalidInput("b1 must be non-zero".into()));
    }
    let (lhs, rhs) = bias_sides(p.b1, p.b2_tilde, p.b1_tilde);
    Ok(classify(lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasRow {
    pub b1_tilde: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub sign: BiasSign,
}

pub fn bias_region_table(b1: f64, b2_tilde: f64, grid: &[f64]) -> Result<Vec<BiasRow>> {
    if b1 == 0.0 {
        return Err(Error::InvalidInput("b1 must be non-zero".into()));
    }
    if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite grid point {x}")));
    }
    Ok(grid
        .iter()
        .map(|&x| {
            let (lhs, rhs) = bias_sides(b1, b2_tilde, x);
            BiasRow { b1_tilde: x, lhs, rhs, sign: classify(lhs, rhs) }
        })
        .collect())
}

/// Evenly spaced grid of `n ≥ 2` points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Values of `B̃1` in `[lo, hi]` where the bias changes sign: sign changes of `LHS − RHS` on
/// an `n`-point grid, refined by bisection to `1e-10`.
pub fn bias_crossovers(b1: f64, b2_tilde: f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let f = |x: f64| {
        let (l, r) = bias_sides(b1, b2_tilde, x);
        l - r
    };
    let grid = linear_grid(lo, hi, n);
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb < 0.0 {
            roots.push(bisect(&f, a, b, 1e-10));
        }
    }
    if let Some(&last) = grid.last() {
        if f(last) == 0.0 {
            roots.push(last);
        }
    }
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}
