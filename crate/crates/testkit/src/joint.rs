//! Brute-force joint-Gaussian conditioning for short linear systems.
//!
//! Every variable is written as an affine function of the base vector
//! `u = (u0, ε1(1), ε2(1), ..., ε1(T), ε2(T))` of independent standard normals,
//! the full joint covariance is `J Jᵀ`, and conditioning is done directly on
//! the stacked observations.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Coefficients of one step, contemporaneous-observation form:
/// `θ' = a0 + a1 θ + b1 ε1 + b2 ε2`, `ξ' = c0 + c1 θ' + d1 ε1 + d2 ε2`.
#[derive(Debug, Clone)]
pub struct Step {
    pub a0: DVector<f64>,
    pub a1: DMatrix<f64>,
    pub b1: DMatrix<f64>,
    pub b2: DMatrix<f64>,
    pub c0: DVector<f64>,
    pub c1: DMatrix<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
}

/// Joint law of `(θ(0..T), ξ(1..T))` as mean vector and loading matrix.
pub struct JointGaussian {
    pub k: usize,
    pub l: usize,
    pub steps: usize,
    pub mean: DVector<f64>,
    pub load: DMatrix<f64>,
}

fn sqrt_psd(x: &DMatrix<f64>) -> DMatrix<f64> {
    let e = SymmetricEigen::new((x + x.transpose()) * 0.5);
    let n = x.nrows();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let lam = e.eigenvalues[i].max(0.0);
        let u = e.eigenvectors.column(i);
        out += u * u.transpose() * lam.sqrt();
    }
    out
}

impl JointGaussian {
    pub fn build(steps: &[Step], m0: &DVector<f64>, g0: &DMatrix<f64>) -> Self {
        let k = m0.len();
        let l = steps.first().map(|s| s.c0.len()).unwrap_or(0);
        let t_len = steps.len();
        let base = k + t_len * (k + l);
        let nvars = (t_len + 1) * k + t_len * l;
        let mut mean = DVector::zeros(nvars);
        let mut load = DMatrix::zeros(nvars, base);

        // θ(0)
        mean.rows_mut(0, k).copy_from(m0);
        load.view_mut((0, 0), (k, k)).copy_from(&sqrt_psd(g0));

        let theta_row = |t: usize| t * k;
        let xi_row = |t: usize| (t_len + 1) * k + (t - 1) * l;
        for (i, s) in steps.iter().enumerate() {
            let t = i + 1;
            let e1 = k + i * (k + l);
            let e2 = e1 + k;
            let prev_mean = mean.rows(theta_row(t - 1), k).clone_owned();
            let prev_load = load.rows(theta_row(t - 1), k).clone_owned();

            let th_mean = &s.a0 + &s.a1 * prev_mean;
            let mut th_load = &s.a1 * prev_load;
            {
                let mut v = th_load.view_mut((0, e1), (k, k));
                v += &s.b1;
            }
            {
                let mut v = th_load.view_mut((0, e2), (k, l));
                v += &s.b2;
            }
            let xi_mean = &s.c0 + &s.c1 * &th_mean;
            let mut xi_load = &s.c1 * &th_load;
            {
                let mut v = xi_load.view_mut((0, e1), (l, k));
                v += &s.d1;
            }
            {
                let mut v = xi_load.view_mut((0, e2), (l, l));
                v += &s.d2;
            }
            mean.rows_mut(theta_row(t), k).copy_from(&th_mean);
            load.rows_mut(theta_row(t), k).copy_from(&th_load);
            mean.rows_mut(xi_row(t), l).copy_from(&xi_mean);
            load.rows_mut(xi_row(t), l).copy_from(&xi_load);
        }
        Self {
            k,
            l,
            steps: t_len,
            mean,
            load,
        }
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        &self.load * self.load.transpose()
    }

    /// Law of the states listed in `theta_idx` given `ξ(1..=upto)` equal to `xi`.
    pub fn condition(
        &self,
        theta_idx: &[usize],
        upto: usize,
        xi: &[DVector<f64>],
    ) -> (DVector<f64>, DMatrix<f64>) {
        let k = self.k;
        let l = self.l;
        let cov = self.covariance();
        let th_rows: Vec<usize> = theta_idx
            .iter()
            .flat_map(|&t| (t * k..(t + 1) * k).collect::<Vec<_>>())
            .collect();
        let xi_rows: Vec<usize> = (1..=upto)
            .flat_map(|t| {
                let r = (self.steps + 1) * k + (t - 1) * l;
                (r..r + l).collect::<Vec<_>>()
            })
            .collect();
        let pick = |rows: &[usize], cols: &[usize]| {
            DMatrix::from_fn(rows.len(), cols.len(), |i, j| cov[(rows[i], cols[j])])
        };
        let s_tt = pick(&th_rows, &th_rows);
        let mu_t = DVector::from_fn(th_rows.len(), |i, _| self.mean[th_rows[i]]);
        if xi_rows.is_empty() {
            return (mu_t, s_tt);
        }
        let s_tx = pick(&th_rows, &xi_rows);
        let s_xx = pick(&xi_rows, &xi_rows);
        let mu_x = DVector::from_fn(xi_rows.len(), |i, _| self.mean[xi_rows[i]]);
        let obs = DVector::from_fn(xi_rows.len(), |i, _| xi[i / l][i % l]);
        let s_xx_inv = s_xx
            .clone()
            .pseudo_inverse(1e-14 * s_xx.amax())
            .expect("svd pseudo-inverse");
        let gain = &s_tx * s_xx_inv;
        let mean = mu_t + &gain * (obs - mu_x);
        let c = s_tt - &gain * s_tx.transpose();
        (mean, (&c + c.transpose()) * 0.5)
    }

    /// `θ(t) | ξ(1..t)`.
    pub fn filtered(&self, t: usize, xi: &[DVector<f64>]) -> (DVector<f64>, DMatrix<f64>) {
        self.condition(&[t], t, xi)
    }

    /// `θ(0..T) | ξ(1..T)`, states stacked in time order.
    pub fn smoothed(&self, xi: &[DVector<f64>]) -> (DVector<f64>, DMatrix<f64>) {
        let idx: Vec<usize> = (0..=self.steps).collect();
        self.condition(&idx, self.steps, xi)
    }

    /// One joint draw of `(θ(0..T), ξ(1..T))` from a vector of standard normals.
    pub fn simulate(&self, z: &DVector<f64>) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
        let x = &self.mean + &self.load * z;
        let k = self.k;
        let l = self.l;
        let th = (0..=self.steps)
            .map(|t| x.rows(t * k, k).clone_owned())
            .collect();
        let xi = (1..=self.steps)
            .map(|t| x.rows((self.steps + 1) * k + (t - 1) * l, l).clone_owned())
            .collect();
        (th, xi)
    }

    pub fn base_dim(&self) -> usize {
        self.load.ncols()
    }
}
