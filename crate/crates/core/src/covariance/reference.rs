//! Closed-form reference laws the solution field is compared against.
//!
//! Two exactly known covariances anchor the test batteries: bifractional
//! Brownian motion (the family the pinned decomposition reduces to) and the
//! d = 1 solution driven by noise white in time, whose covariance
//! `(2 pi)^(-1/2) (sqrt(t + s) - sqrt(|t - s|))` is a constant multiple of
//! the bifractional law with `Hb = K = 1/2`. Both are cheap enough to call
//! inside estimator calibration loops.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Covariance of bifractional Brownian motion with indices `hb in (0, 1)`
/// and `k in (0, 1]`:
///
/// ```text
/// R(t, s) = 2^(-k) ((t^(2 hb) + s^(2 hb))^k - |t - s|^(2 hb k))
/// ```
///
/// At `k = 1` this collapses to the fractional Brownian covariance with
/// Hurst index `hb`; on the diagonal it equals `t^(2 hb k)`, so the process
/// is self-similar of order `hb k`.
pub fn bifbm_covariance(hb: f64, k: f64, t: f64, s: f64) -> Result<f64> {
    if !(hb > 0.0 && hb < 1.0) || !hb.is_finite() {
        return Err(Error::ParameterDomain(format!(
            "bifractional index hb must lie in (0, 1), got {hb}"
        )));
    }
    if !(k > 0.0 && k <= 1.0) {
        return Err(Error::ParameterDomain(format!(
            "bifractional index k must lie in (0, 1], got {k}"
        )));
    }
    if !(t >= 0.0 && s >= 0.0) || !t.is_finite() || !s.is_finite() {
        return Err(Error::ParameterDomain(format!(
            "times must be finite and nonnegative, got ({t}, {s})"
        )));
    }
    let sum = t.powf(2.0 * hb) + s.powf(2.0 * hb);
    let gap = (t - s).abs().powf(2.0 * hb * k);
    Ok(0.5f64.powf(k) * (sum.powf(k) - gap))
}

/// Covariance of the d = 1 solution when the driving noise is white in time
/// and space (`H = 1/2` limit of the fractional-colored model):
///
/// ```text
/// R(t, s) = (2 pi)^(-1/2) (sqrt(t + s) - sqrt(|t - s|))
/// ```
///
/// The ratio to [`bifbm_covariance`] at `hb = k = 1/2` is the constant
/// `1/sqrt(pi)` for every `(t, s)`, which identifies this solution in law
/// with a rescaled bifractional Brownian motion; the test suite pins both
/// the constancy and the value.
pub fn white_noise_solution_covariance(t: f64, s: f64) -> Result<f64> {
    if !(t >= 0.0 && s >= 0.0) || !t.is_finite() || !s.is_finite() {
        return Err(Error::ParameterDomain(format!(
            "times must be finite and nonnegative, got ({t}, {s})"
        )));
    }
    Ok(((t + s).sqrt() - (t - s).abs().sqrt()) / (2.0 * PI).sqrt())
}
