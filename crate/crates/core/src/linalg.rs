//! Small dense linear algebra helpers built on `nalgebra`.
//!
//! Covariance-role matrices are kept symmetric by construction: every helper
//! that produces one returns `(X + Xᵀ) / 2`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative eigenvalue cutoff used by [`pinv_psd`] throughout the crate.
pub const PINV_TOL: f64 = 1e-12;

/// Relative tolerance for the symmetry precondition.
pub const SYMMETRY_TOL: f64 = 1e-12;

pub fn symmetrize(x: &Mat) -> Mat {
    (x + x.transpose()) * 0.5
}

pub fn max_abs(x: &Mat) -> f64 {
    x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn all_finite(x: &Mat) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Checks squareness, finiteness and symmetry (relative to the largest entry).
pub fn check_symmetric(x: &Mat) -> Result<()> {
    if x.nrows() != x.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    if x.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("matrix contains NaN".into()));
    }
    if !all_finite(x) {
        return Err(Error::InvalidInput("matrix contains infinite entries".into()));
    }
    let scale = max_abs(x);
    let asymmetry = max_abs(&(x - x.transpose()));
    if asymmetry > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) && asymmetry > 0.0 {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(())
}

/// Moore–Penrose pseudo-inverse of a symmetric positive semi-definite matrix.
///
/// Eigenvalues below `tol * λ_max` (including slightly negative ones produced
/// by rounding) are treated as zero.
pub fn pinv_psd(x: &Mat, tol: f64) -> Result<Mat> {
    pinv_psd_with_floor(x, tol, 0.0)
}

/// Like [`pinv_psd`], with the cutoff taken relative to `max(λ_max, reference)`.
///
/// Schur complements formed by subtraction carry rounding error proportional to
/// the operands rather than to the result; `reference` lets the caller supply
/// that operand scale so a numerically-zero complement is recognised as zero.
pub fn pinv_psd_with_floor(x: &Mat, tol: f64, reference: f64) -> Result<Mat> {
    check_symmetric(x)?;
    let n = x.nrows();
    if n == 1 {
        let v = x[(0, 0)];
        let cutoff = tol * v.max(reference);
        let inv = if v > 0.0 && v > cutoff { 1.0 / v } else { 0.0 };
        return Ok(Mat::from_element(1, 1, inv));
    }
    let eig = SymmetricEigen::new(symmetrize(x));
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = tol * lmax.max(reference);
    let mut out = Mat::zeros(n, n);
    if lmax <= 0.0 {
        return Ok(out);
    }
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > cutoff && lam > 0.0 {
            let u = eig.eigenvectors.column(i);
            out += (u * u.transpose()) / lam;
        }
    }
    Ok(symmetrize(&out))
}

/// Numerical rank of a PSD matrix under the same cutoff rule as [`pinv_psd_with_floor`].
pub fn psd_rank(x: &Mat, tol: f64, reference: f64) -> usize {
    if x.nrows() == 1 {
        let v = x[(0, 0)];
        return usize::from(v > 0.0 && v > tol * v.max(reference));
    }
    let eig = SymmetricEigen::new(symmetrize(x));
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = tol * lmax.max(reference);
    eig.eigenvalues
        .iter()
        .filter(|&&lam| lam > cutoff && lam > 0.0)
        .count()
}

/// Symmetric square root `L` with `L Lᵀ = X`, clipping negative eigenvalues.
///
/// Works for rank-deficient covariances where a Cholesky factor does not exist.
pub fn psd_sqrt(x: &Mat) -> Mat {
    let n = x.nrows();
    if n == 1 {
        return Mat::from_element(1, 1, x[(0, 0)].max(0.0).sqrt());
    }
    let eig = SymmetricEigen::new(symmetrize(x));
    let mut out = Mat::zeros(n, n);
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > 0.0 {
            let u = eig.eigenvectors.column(i);
            out += (u * u.transpose()) * lam.sqrt();
        }
    }
    out
}

pub fn min_eigenvalue(x: &Mat) -> f64 {
    if x.nrows() == 1 {
        return x[(0, 0)];
    }
    SymmetricEigen::new(symmetrize(x))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Scalar counterpart of [`pinv_psd`]; agrees with the 1×1 matrix path exactly.
#[inline]
pub fn pinv_scalar(v: f64) -> f64 {
    if v > 0.0 {
        1.0 / v
    } else {
        0.0
    }
}

/// Scalar counterpart of [`pinv_psd_with_floor`].
#[inline]
pub fn pinv_scalar_with_floor(v: f64, tol: f64, reference: f64) -> f64 {
    if v > 0.0 && v > tol * v.max(reference) {
        1.0 / v
    } else {
        0.0
    }
}
