//! Empirical variograms and power-law exponent fits.
//!
//! The mean-square increment of a sampled field at lag `h`,
//! `E|u(g + h) - u(g)|^2`, is estimated by averaging squared increments
//! over every grid pair realizing the lag *within* each path, then over
//! paths. Paths are independent by construction, so the across-path
//! scatter of the per-path means gives honest Monte Carlo error bars; the
//! within-path average merely reduces variance.
//!
//! Exponent fits run weighted least squares on the log-log table: if the
//! variogram follows `c h^(2 gamma)`, the slope of `ln v` against `ln h`
//! is `2 gamma`. Weights are the inverse squared standard errors of
//! `ln v`, i.e. `(v / se)^2`, which de-emphasizes the noisy fine lags of a
//! small ensemble; tables without error bars (exact quadrature tables, or
//! single-path ensembles) fall back to an unweighted fit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samplers::PathEnsemble;

/// Pass/fail outcome of a fitted quantity against its theoretical value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Per-lag mean-square increments with Monte Carlo error bars.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariogramEstimate {
    /// Lags, in grid units, strictly increasing.
    pub lags: Vec<f64>,
    /// Estimated mean-square increments.
    pub values: Vec<f64>,
    /// Standard errors of `values` from the across-path scatter
    /// (zero when the ensemble has a single path).
    pub stderrs: Vec<f64>,
}

/// A fitted scaling exponent compared against its theoretical value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    /// Fitted exponent: half the log-log slope of the variogram.
    pub estimate: f64,
    /// Standard error of the estimate.
    pub stderr: f64,
    /// Weighted coefficient of determination of the log-log fit.
    pub r_squared: f64,
    /// Lags entering the fit.
    pub lags_used: Vec<f64>,
    /// Exponent predicted by the model parameters.
    pub theory_value: f64,
    /// Acceptance half-width around the theoretical value.
    pub tolerance: f64,
    /// Pass iff `|estimate - theory_value| <= tolerance`.
    pub verdict: Verdict,
}

/// Relative tolerance for matching a requested lag to grid separations.
const LAG_MATCH_TOL: f64 = 1e-8;

/// Estimates the variogram of `ensemble` at the given lags.
///
/// Each lag must be realized by at least one grid pair (up to a relative
/// tolerance of 1e-8); per-path means over all realizing pairs are
/// averaged across paths, and the error bar is the standard error of that
/// across-path mean.
pub fn empirical_variogram(ensemble: &PathEnsemble, lags: &[f64]) -> Result<VariogramEstimate> {
    if lags.is_empty() {
        return Err(Error::EstimatorInput("no lags requested".to_string()));
    }
    if !lags.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::EstimatorInput(
            "lags must be strictly increasing".to_string(),
        ));
    }
    let grid = ensemble.grid();
    let min_step = grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    // Pair lists per lag, via a two-pointer sweep over the sorted grid.
    let mut pair_sets: Vec<Vec<(usize, usize)>> = Vec::with_capacity(lags.len());
    for &lag in lags {
        if !(lag > 0.0) || !lag.is_finite() {
            return Err(Error::EstimatorInput(format!(
                "lags must be positive and finite, got {lag}"
            )));
        }
        let tol = LAG_MATCH_TOL * lag.max(min_step);
        let mut pairs = Vec::new();
        let mut j = 0;
        for i in 0..grid.len() {
            if j <= i {
                j = i + 1;
            }
            while j < grid.len() && grid[j] - grid[i] < lag - tol {
                j += 1;
            }
            if j < grid.len() && (grid[j] - grid[i] - lag).abs() <= tol {
                pairs.push((i, j));
            }
        }
        if pairs.is_empty() {
            return Err(Error::LagNotOnGrid { lag, step: min_step });
        }
        pair_sets.push(pairs);
    }
    let n_paths = ensemble.n_paths();
    // Per-path means for every lag, computed in parallel over paths and
    // reduced in fixed path order.
    let per_path: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let path = ensemble.path(p);
            pair_sets
                .iter()
                .map(|pairs| {
                    let sum: f64 = pairs
                        .iter()
                        .map(|&(i, j)| {
                            let d = path[j] - path[i];
                            d * d
                        })
                        .sum();
                    sum / pairs.len() as f64
                })
                .collect()
        })
        .collect();
    let nf = n_paths as f64;
    let mut values = Vec::with_capacity(lags.len());
    let mut stderrs = Vec::with_capacity(lags.len());
    for l in 0..lags.len() {
        let mean = per_path.iter().map(|row| row[l]).sum::<f64>() / nf;
        let stderr = if n_paths > 1 {
            let ss: f64 = per_path
                .iter()
                .map(|row| {
                    let d = row[l] - mean;
                    d * d
                })
                .sum();
            (ss / (nf - 1.0)).sqrt() / nf.sqrt()
        } else {
            0.0
        };
        values.push(mean);
        stderrs.push(stderr);
    }
    Ok(VariogramEstimate {
        lags: lags.to_vec(),
        values,
        stderrs,
    })
}

/// Fits a scaling exponent to a variogram table and compares it to theory.
///
/// Requires at least 5 lags spanning at least 3 octaves. The fit is
/// weighted log-log least squares (weights `(v/se)^2`, the inverse
/// variance of `ln v`); tables with any nonpositive error bar are fitted
/// unweighted. The estimate is half the slope, since a variogram scaling
/// as `h^(2 gamma)` has log-log slope `2 gamma`.
pub fn fit_exponent(
    table: &VariogramEstimate,
    theory_value: f64,
    tolerance: f64,
) -> Result<ExponentReport> {
    let n = table.lags.len();
    if n < 5 {
        return Err(Error::EstimatorInput(format!(
            "exponent fit needs at least 5 lags, got {n}"
        )));
    }
    let span = table.lags[n - 1] / table.lags[0];
    if !(span >= 8.0) {
        return Err(Error::EstimatorInput(format!(
            "lags must span at least 3 octaves, got a ratio of {span:.3}"
        )));
    }
    if table.values.len() != n || table.stderrs.len() != n {
        return Err(Error::EstimatorInput(
            "variogram table columns have mismatched lengths".to_string(),
        ));
    }
    if let Some(&v) = table.values.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::EstimatorInput(format!(
            "degenerate fit: nonpositive variogram value {v}"
        )));
    }
    let weighted = table.stderrs.iter().all(|&s| s > 0.0 && s.is_finite());
    let w: Vec<f64> = if weighted {
        table
            .values
            .iter()
            .zip(&table.stderrs)
            .map(|(&v, &s)| (v / s) * (v / s))
            .collect()
    } else {
        vec![1.0; n]
    };
    let x: Vec<f64> = table.lags.iter().map(|&h| h.ln()).collect();
    let y: Vec<f64> = table.values.iter().map(|&v| v.ln()).collect();
    let w_sum: f64 = w.iter().sum();
    let x_bar = x.iter().zip(&w).map(|(&x, &w)| w * x).sum::<f64>() / w_sum;
    let y_bar = y.iter().zip(&w).map(|(&y, &w)| w * y).sum::<f64>() / w_sum;
    let sxx: f64 = x.iter().zip(&w).map(|(&x, &w)| w * (x - x_bar) * (x - x_bar)).sum();
    let sxy: f64 = x
        .iter()
        .zip(&y)
        .zip(&w)
        .map(|((&x, &y), &w)| w * (x - x_bar) * (y - y_bar))
        .sum();
    if sxx == 0.0 {
        return Err(Error::EstimatorInput(
            "degenerate fit: all lags coincide in log space".to_string(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let ss_res: f64 = x
        .iter()
        .zip(&y)
        .zip(&w)
        .map(|((&x, &y), &w)| {
            let r = y - (intercept + slope * x);
            w * r * r
        })
        .sum();
    let ss_tot: f64 = y.iter().zip(&w).map(|(&y, &w)| w * (y - y_bar) * (y - y_bar)).sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    // With genuine inverse-variance weights the slope variance is 1/Sxx;
    // the unweighted fit uses the residual variance instead.
    let slope_var = if weighted {
        1.0 / sxx
    } else {
        ss_res / (n as f64 - 2.0) / sxx
    };
    let estimate = 0.5 * slope;
    let stderr = 0.5 * slope_var.max(0.0).sqrt();
    let verdict = if (estimate - theory_value).abs() <= tolerance {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ExponentReport {
        estimate,
        stderr,
        r_squared,
        lags_used: table.lags.clone(),
        theory_value,
        tolerance,
        verdict,
    })
}
