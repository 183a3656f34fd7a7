//! Distribution tests and sample summaries.

use std::f64::consts::PI;

use statrs::distribution::{ContinuousCDF, InverseGamma, Normal};

/// Asymptotic Kolmogorov tail `P(K > λ)` with the usual finite-sample correction
/// folded into `λ` by the callers.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    if lambda < 1.18 {
        // small-λ form converges faster here
        let y = (-PI * PI / (8.0 * lambda * lambda)).exp();
        let s: f64 = (0..50)
            .map(|j| y.powi((2 * j + 1) * (2 * j + 1)))
            .sum();
        return (1.0 - (2.0 * PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        s += if j % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test; returns `(D, p)`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> (f64, f64) {
    let mut x = samples.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let f = cdf(v);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    (d, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d))
}

/// Two-sample Kolmogorov–Smirnov test; returns `(D, p)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| p.partial_cmp(q).unwrap());
    y.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let sn = ne.sqrt();
    (d, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d))
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn covariance(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / (x.len() as f64 - 1.0)
}

pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    covariance(x, y) / (variance(x) * variance(y)).sqrt()
}

/// Integrated autocorrelation time with Geyer's initial-positive-sequence truncation.
pub fn autocorr_time(x: &[f64]) -> f64 {
    let n = x.len();
    let m = mean(x);
    let c0: f64 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 1.0;
    }
    let acf = |lag: usize| -> f64 {
        (0..n - lag).map(|i| (x[i] - m) * (x[i + lag] - m)).sum::<f64>() / (n as f64 * c0)
    };
    let mut tau = 1.0;
    let mut lag = 1;
    while lag + 1 < n / 2 {
        let pair = acf(lag) + acf(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    tau
}

pub fn normal_cdf(mean: f64, var: f64) -> impl Fn(f64) -> f64 {
    let d = Normal::new(mean, var.sqrt()).expect("normal parameters");
    move |x| d.cdf(x)
}

/// `N(mean, var)` restricted to `[floor, ∞)`.
pub fn truncated_normal_cdf(mean: f64, var: f64, floor: f64) -> impl Fn(f64) -> f64 {
    let d = Normal::new(mean, var.sqrt()).expect("normal parameters");
    let lo = d.cdf(floor);
    move |x| if x <= floor { 0.0 } else { (d.cdf(x) - lo) / (1.0 - lo) }
}

/// Inverse-gamma with shape `shape` and scale `scale` (density ∝ x^(−shape−1) e^(−scale/x)).
pub fn inverse_gamma_cdf(shape: f64, scale: f64) -> impl Fn(f64) -> f64 {
    let d = InverseGamma::new(shape, scale).expect("inverse-gamma parameters");
    move |x| d.cdf(x)
}

/// CDF of a density tabulated on an increasing grid, by trapezoidal accumulation.
pub struct GridCdf {
    grid: Vec<f64>,
    cum: Vec<f64>,
}

impl GridCdf {
    pub fn from_log_density<F: Fn(f64) -> f64>(lo: f64, hi: f64, n: usize, log_density: F) -> Self {
        let grid: Vec<f64> = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        let logs: Vec<f64> = grid.iter().map(|&x| log_density(x)).collect();
        let lmax = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let dens: Vec<f64> = logs.iter().map(|l| (l - lmax).exp()).collect();
        let mut cum = vec![0.0; n];
        for i in 1..n {
            cum[i] = cum[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (grid[i] - grid[i - 1]);
        }
        let total = cum[n - 1];
        for c in &mut cum {
            *c /= total;
        }
        Self { grid, cum }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.grid[0] {
            return 0.0;
        }
        let n = self.grid.len();
        if x >= self.grid[n - 1] {
            return 1.0;
        }
        let i = self.grid.partition_point(|&g| g <= x);
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let w = (x - x0) / (x1 - x0);
        self.cum[i - 1] + w * (self.cum[i] - self.cum[i - 1])
    }
}
