//! Descriptive statistics, goodness-of-fit distances and least squares.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{ExpError, Result};
use crate::report::Stat;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Mean with its standard error.
pub fn mean_stat(xs: &[f64]) -> Stat {
    let se = if xs.len() >= 2 { Some((variance(xs) / xs.len() as f64).sqrt()) } else { None };
    Stat::new(mean(xs), se, xs.len() as u64)
}

/// Central moment ratios: standardized skewness and excess kurtosis.
pub fn shape(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Approximate standard errors of skewness and excess kurtosis under
/// normality.
pub fn shape_se(n: usize) -> (f64, f64) {
    let n = n as f64;
    ((6.0 / n).sqrt(), (24.0 / n).sqrt())
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Total-variation distance between two distributions on the same keys.
pub fn total_variation<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut d = 0.0;
    for (k, a) in p {
        d += (a - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, b) in q {
        if !p.contains_key(k) {
            d += b.abs();
        }
    }
    d / 2.0
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(statistic: f64, df: usize) -> Result<f64> {
    let dist = ChiSquared::new(df as f64).map_err(|e| ExpError::Config(format!("chi-square with {df} degrees of freedom: {e}")))?;
    Ok(1.0 - dist.cdf(statistic))
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn ols(x: &[f64], y: &[f64]) -> Result<Fit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(ExpError::Config(format!("regression needs at least 3 paired points, got {}", x.len().min(y.len()))));
    }
    let n = x.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return Err(ExpError::Config("regression on a constant predictor".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = (syy - slope * sxy).max(0.0);
    let r_squared = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    let slope_se = (rss / (n - 2.0) / sxx).sqrt();
    Ok(Fit { slope, intercept, slope_se, r_squared, points: x.len() })
}

/// Value at `x = 0` of the interpolating polynomial through the points.
pub fn neville_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (x[i + m] * p[i] - x[i] * p[i + 1]) / (x[i + m] - x[i]);
        }
    }
    p[0]
}

/// Sample covariance matrix of row vectors.
pub fn covariance(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let d = rows.first().map_or(0, Vec::len);
    let n = rows.len() as f64;
    let means: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    DMatrix::from_fn(d, d, |i, j| {
        rows.iter().map(|r| (r[i] - means[i]) * (r[j] - means[j])).sum::<f64>() / (n - 1.0)
    })
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Mardia's multivariate kurtosis, standardized to be asymptotically N(0, 1)
/// under normality.
pub fn mardia_kurtosis(rows: &[Vec<f64>]) -> Option<f64> {
    let d = rows.first()?.len();
    let n = rows.len() as f64;
    let means: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let s = DMatrix::from_fn(d, d, |i, j| rows.iter().map(|r| (r[i] - means[i]) * (r[j] - means[j])).sum::<f64>() / n);
    let inv = s.try_inverse()?;
    let b2 = rows
        .iter()
        .map(|r| {
            let v = nalgebra::DVector::from_fn(d, |i, _| r[i] - means[i]);
            let q = (v.transpose() * &inv * &v)[(0, 0)];
            q * q
        })
        .sum::<f64>()
        / n;
    let df = d as f64;
    Some((b2 - df * (df + 2.0)) / (8.0 * df * (df + 2.0) / n).sqrt())
}
