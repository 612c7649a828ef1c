//! Structural checks tied to specific parameter regimes: differentiability
//! of spatial slices when the raw space exponent exceeds one, and exact
//! temporal self-similarity under the scale-free spectral weight.

use crate::covariance::temporal::temporal_covariance;
use crate::error::{Error, Result};
use crate::estimators::variogram::{empirical_variogram, fit_exponent, ExponentReport};
use crate::params::{KernelFamily, ModelParams};
use crate::quad::QuadratureSpec;
use crate::samplers::ensemble::fnv1a;
use crate::samplers::PathEnsemble;

/// Verifies the smooth spatial regime on a sampled slice.
///
/// When the raw space exponent `2H - (d - alpha)/2` exceeds one, spatial
/// slices are continuously differentiable and the roughness moves to the
/// derivative: its variogram scales with exponent `beta_raw - 1`. The
/// check builds the difference-quotient field on midpoints,
///
/// `v_i = (u(x_{i+1}) - u(x_i)) / (x_{i+1} - x_i)`,
///
/// estimates its variogram exponent at the given lags, and compares
/// against that theory value. Outside the smooth regime the claim is
/// false and the check refuses to run.
pub fn smoothness_check(
    params: &ModelParams,
    ensemble: &PathEnsemble,
    lags: &[f64],
    tolerance: f64,
) -> Result<ExponentReport> {
    let beta_raw = params.beta_raw();
    if beta_raw <= 1.0 {
        return Err(Error::RegimeNotSmooth { exponent: beta_raw });
    }
    let grid = ensemble.grid();
    if grid.len() < 2 {
        return Err(Error::EstimatorInput(
            "difference quotients need at least two grid points".to_string(),
        ));
    }
    let mid: Vec<f64> = grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut quotients = Vec::with_capacity(ensemble.n_paths() * mid.len());
    for path in ensemble.iter_paths() {
        for (w, pair) in grid.windows(2).zip(path.windows(2)) {
            quotients.push((pair[1] - pair[0]) / (w[1] - w[0]));
        }
    }
    let derivative = PathEnsemble::new(
        mid,
        ensemble.unit(),
        quotients,
        ensemble.seed(),
        ensemble.method(),
        fnv1a([0xd1_u64, ensemble.fingerprint()]),
        ensemble.series_bias(),
    )?;
    let table = empirical_variogram(&derivative, lags)?;
    fit_exponent(&table, beta_raw - 1.0, tolerance)
}

/// Maximal relative violation of temporal self-similarity at scale `c`.
///
/// Under the scale-free spectral weight the solution restarted at a fixed
/// spatial point is self-similar with exponent `gamma`: its covariance
/// satisfies `R(ct, cs) = c^{2 gamma} R(t, s)` exactly. This evaluates
///
/// `max over pairs of |R(c t_i, c t_j) - c^{2 gamma} R(t_i, t_j)| / R(t_i, t_i)`
///
/// over the given positive times, returning the worst normalized
/// deviation — pure quadrature error when the theory holds. Both the
/// grid and its scaled image must stay within the model horizon.
pub fn self_similarity_check(
    params: &ModelParams,
    c: f64,
    grid: &[f64],
    q: &QuadratureSpec,
) -> Result<f64> {
    if params.kernel() != KernelFamily::Riesz {
        return Err(Error::UnsupportedKernel {
            operation: "self_similarity_check",
            reason: "exact scaling holds only for the scale-free spectral weight",
        });
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::EstimatorInput(format!(
            "scale factor must be positive and finite, got {c}"
        )));
    }
    if grid.is_empty() || !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::EstimatorInput(
            "times must be nonempty and strictly increasing".to_string(),
        ));
    }
    let horizon = params.t_horizon() * (1.0 + 1e-12);
    let reach = grid[grid.len() - 1] * c.max(1.0);
    if grid[0] <= 0.0 || reach > horizon {
        return Err(Error::EstimatorInput(format!(
            "times and their scaled images must lie in (0, {}], got reach {reach}",
            params.t_horizon()
        )));
    }
    let scaling = c.powf(2.0 * params.gamma());
    let mut worst = 0.0_f64;
    for (i, &t) in grid.iter().enumerate() {
        let denom = temporal_covariance(params, t, t, q)?;
        for &s in &grid[..=i] {
            let scaled = temporal_covariance(params, c * t, c * s, q)?;
            let base = temporal_covariance(params, t, s, q)?;
            worst = worst.max((scaled - scaling * base).abs() / denom);
        }
    }
    Ok(worst)
}
