//! Summary statistics and power-law fits.

use serde::Serialize;

use crate::error::{Error, Result};

/// Pairwise (cascade) summation; the result depends only on the order of
/// `values`, not on how the work was split between threads.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    pairwise_sum(&sq) / (values.len() - 1) as f64
}

/// Delete-one jackknife estimate of the variance of the sample variance.
pub fn jackknife_variance_of_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 3 {
        return 0.0;
    }
    let m = mean(values);
    let c: Vec<f64> = values.iter().map(|v| v - m).collect();
    let s1 = pairwise_sum(&c);
    let sq: Vec<f64> = c.iter().map(|v| v * v).collect();
    let s2 = pairwise_sum(&sq);
    let k = (n - 1) as f64;
    let loo: Vec<f64> = c
        .iter()
        .map(|ci| {
            let a = s1 - ci;
            let b = s2 - ci * ci;
            ((b - a * a / k) / (k - 1.0)).max(0.0)
        })
        .collect();
    let lm = mean(&loo);
    let dev: Vec<f64> = loo.iter().map(|v| (v - lm) * (v - lm)).collect();
    k / n as f64 * pairwise_sum(&dev)
}

/// Slope of a fitted power law `y = C x^slope`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
}

/// Weighted least squares of `log y` on `log x` for rows `(x, y, sigma_y)`.
///
/// Weights are `(y / sigma_y)^2`, the inverse squared relative errors. The
/// reported standard error is the formal one inflated by `sqrt` of the
/// reduced chi-square when that exceeds one. When every `sigma_y` is zero
/// the fit is ordinary least squares with a residual-based error.
pub fn fit_exponent(rows: &[(f64, f64, f64)]) -> Result<PowerFit> {
    if rows.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: rows.len(),
        });
    }
    for (i, &(x, y, _)) in rows.iter().enumerate() {
        if !(y > 0.0) {
            return Err(Error::NonPositive { row: i, value: y });
        }
        if !(x > 0.0) {
            return Err(Error::NonPositive { row: i, value: x });
        }
    }
    let unweighted = rows.iter().all(|r| r.2 == 0.0);
    let pts: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|&(x, y, e)| {
            let w = if unweighted {
                1.0
            } else {
                let rel = (e / y).max(1e-300);
                1.0 / (rel * rel)
            };
            (x.ln(), y.ln(), w)
        })
        .collect();
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::IllConditioned("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let chi2: f64 = pts
        .iter()
        .map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let dof = (pts.len() - 2) as f64;
    let stderr = if unweighted {
        (chi2 / dof / sxx).sqrt()
    } else {
        (1.0 / sxx).sqrt() * (chi2 / dof).max(1.0).sqrt()
    };
    Ok(PowerFit {
        slope,
        stderr,
        intercept,
    })
}
