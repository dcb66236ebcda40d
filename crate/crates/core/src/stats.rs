//! Sample statistics used by the ensemble experiments.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::sum::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    /// Unbiased (`n - 1`) variance.
    pub variance: f64,
    pub skewness: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    compensated_sum(xs.iter().copied()) / xs.len() as f64
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let m = mean(xs);
    let m2 = compensated_sum(xs.iter().map(|x| (x - m) * (x - m)));
    let m3 = compensated_sum(xs.iter().map(|x| (x - m).powi(3)));
    let variance = if xs.len() > 1 { m2 / (n - 1.0) } else { 0.0 };
    let pop_var = m2 / n;
    let skewness = if pop_var > 0.0 {
        (m3 / n) / pop_var.powf(1.5)
    } else {
        0.0
    };
    Moments {
        mean: m,
        variance,
        skewness,
    }
}

/// Unbiased sample covariance.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return 0.0;
    }
    let (mx, my) = (mean(xs), mean(ys));
    compensated_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my))) / (xs.len() as f64 - 1.0)
}

/// Standard error of [`covariance`], from the spread of the centered products.
pub fn covariance_standard_error(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    (moments(&prods).variance / xs.len() as f64).sqrt()
}

/// Covariance matrix of the columns `cols[j]`.
pub fn covariance_matrix(cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = cols.len();
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let c = covariance(&cols[i], &cols[j]);
            out[i][j] = c;
            out[j][i] = c;
        }
    }
    out
}

/// Two-sided one-sample Kolmogorov-Smirnov statistic `sup |F_n - F|`.
pub fn ks_distance<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        acc.max(above).max(below)
    })
}

/// Distance to the centered Gaussian with the given variance.
pub fn ks_distance_gaussian(xs: &[f64], variance: f64) -> f64 {
    let normal = Normal::new(0.0, variance.sqrt()).expect("positive variance");
    ks_distance(xs, |x| normal.cdf(x))
}

/// Asymptotic critical value of the KS statistic at level `alpha`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

pub fn median_u64(xs: &[u64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_unstable();
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0
    }
}

/// Cholesky test for positive semidefiniteness, with `tol` added to the diagonal.
pub fn is_positive_semidefinite(m: &[Vec<f64>], tol: f64) -> bool {
    let k = m.len();
    let mut l = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let s: f64 = (0..j).map(|p| l[i][p] * l[j][p]).sum();
            if i == j {
                let d = m[i][i] + tol - s;
                if d < 0.0 {
                    return false;
                }
                l[i][j] = d.sqrt();
            } else if l[j][j] > 0.0 {
                l[i][j] = (m[i][j] - s) / l[j][j];
            } else {
                l[i][j] = 0.0;
            }
        }
    }
    true
}
