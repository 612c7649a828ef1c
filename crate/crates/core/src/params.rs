//! Model parameters for the fractional-colored noise and its solution field.
//!
//! The field solves dU/dt = (1/2) Laplacian + noise on R^d with vanishing
//! initial condition. The noise is fractional in time with Hurst index
//! `H in (1/2, 1)` and spatially homogeneous with spectral measure
//! `mu(d xi) = weight(|xi|) d xi`, where the weight is either a Riesz kernel
//! `|xi|^(-alpha)` or a Bessel kernel `(1 + |xi|^2)^(-alpha/2)`.
//!
//! A mild solution with finite variance exists if and only if
//! `d < 4H + alpha`; constructors reject parameter sets violating it.
//! Two derived exponents recur everywhere:
//!
//! * temporal Hoelder exponent `gamma = H - (d - alpha)/4`,
//! * spatial variogram exponent `beta = min(1, 2H - (d - alpha)/2)`,
//!
//! with `2 gamma = 2H - (d - alpha)/2` the raw spatial exponent before
//! capping. The raw exponent above 1 puts the field in the smooth spatial
//! regime (differentiable sample slices).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial covariance kernel family of the driving noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// Spectral weight `|xi|^(-alpha)`; scale-homogeneous, admits exact
    /// closed-form reductions in time.
    Riesz,
    /// Spectral weight `(1 + |xi|^2)^(-alpha/2)`; bounded at the origin,
    /// same large-frequency tail as Riesz, bounds-only in time.
    Bessel,
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelFamily::Riesz => write!(f, "riesz"),
            KernelFamily::Bessel => write!(f, "bessel"),
        }
    }
}

/// Validated parameter set for the noise and solution field.
///
/// Invariants enforced at construction: `1/2 < h < 1`, `0 < alpha < d`,
/// `d in {1, 2, 3}`, `t_horizon > 0`, and the existence condition
/// `d < 4h + alpha` (strict).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    h: f64,
    alpha: f64,
    d: u32,
    kernel: KernelFamily,
    t_horizon: f64,
}

/// Existence condition for the mild solution: `d < 4h + alpha`, strict.
///
/// Takes raw field values so that it can be consulted before a
/// [`ModelParams`] is constructible.
pub fn existence_condition(h: f64, alpha: f64, d: u32) -> bool {
    (d as f64) < 4.0 * h + alpha
}

impl ModelParams {
    /// Validates every field and the existence condition.
    pub fn new(h: f64, alpha: f64, d: u32, kernel: KernelFamily, t_horizon: f64) -> Result<Self> {
        if !(h > 0.5 && h < 1.0) || !h.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "h must lie in (1/2, 1), got {h}"
            )));
        }
        if !(1..=3).contains(&d) {
            return Err(Error::ParameterDomain(format!(
                "d must be 1, 2, or 3, got {d}"
            )));
        }
        if !(alpha > 0.0 && alpha < d as f64) || !alpha.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "alpha must lie in (0, d) = (0, {d}), got {alpha}"
            )));
        }
        if !(t_horizon > 0.0) || !t_horizon.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "t_horizon must be positive and finite, got {t_horizon}"
            )));
        }
        if !existence_condition(h, alpha, d) {
            return Err(Error::ExistenceViolation {
                d,
                value: 4.0 * h + alpha,
            });
        }
        Ok(Self {
            h,
            alpha,
            d,
            kernel,
            t_horizon,
        })
    }

    /// Hurst index of the temporal noise, in (1/2, 1).
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Spectral weight exponent, in (0, d).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Spatial dimension, 1, 2, or 3.
    pub fn d(&self) -> u32 {
        self.d
    }

    /// Kernel family of the spatial covariance.
    pub fn kernel(&self) -> KernelFamily {
        self.kernel
    }

    /// Largest time the pinned decomposition is used up to.
    pub fn t_horizon(&self) -> f64 {
        self.t_horizon
    }

    /// Temporal Hoelder exponent `gamma = h - (d - alpha)/4`, in (0, 1).
    pub fn gamma(&self) -> f64 {
        self.h - (self.d as f64 - self.alpha) / 4.0
    }

    /// Raw spatial exponent `2h - (d - alpha)/2 = 2 gamma` before capping.
    pub fn beta_raw(&self) -> f64 {
        2.0 * self.h - (self.d as f64 - self.alpha) / 2.0
    }

    /// Spatial variogram exponent `beta = min(1, beta_raw)`.
    pub fn beta(&self) -> f64 {
        self.beta_raw().min(1.0)
    }

    /// True when `beta_raw > 1`: spatial slices are differentiable and the
    /// derivative field has Hoelder exponent `beta_raw - 1`.
    pub fn smooth_regime(&self) -> bool {
        self.beta_raw() > 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn riesz(h: f64, alpha: f64, d: u32) -> Result<ModelParams> {
        ModelParams::new(h, alpha, d, KernelFamily::Riesz, 2.0)
    }

    #[test]
    fn accepts_reference_parameters() {
        let p = riesz(0.7, 0.5, 1).unwrap();
        assert!((p.gamma() - 0.575).abs() < 1e-15);
        assert!((p.beta_raw() - 1.15).abs() < 1e-15);
        assert!((p.beta() - 1.0).abs() < 1e-15);
        assert!(p.smooth_regime());
    }

    #[test]
    fn rejects_out_of_range_fields() {
        assert!(riesz(0.5, 0.5, 1).is_err());
        assert!(riesz(1.0, 0.5, 1).is_err());
        assert!(riesz(0.7, 0.0, 1).is_err());
        assert!(riesz(0.7, 1.0, 1).is_err());
        assert!(riesz(0.7, 0.5, 0).is_err());
        assert!(riesz(0.7, 0.5, 4).is_err());
        assert!(ModelParams::new(0.7, 0.5, 1, KernelFamily::Riesz, 0.0).is_err());
    }

    #[test]
    fn existence_condition_is_strict_and_names_values() {
        // d = 3 with 4H + alpha = 2.9 < 3 must be rejected.
        let err = riesz(0.6, 0.5, 3).unwrap_err();
        match err {
            Error::ExistenceViolation { d, value } => {
                assert_eq!(d, 3);
                assert!((value - 2.9).abs() < 1e-12);
            }
            other => panic!("expected existence violation, got {other:?}"),
        }
        let msg = riesz(0.6, 0.5, 3).unwrap_err().to_string();
        assert!(msg.contains("d < 4H + alpha"), "message was: {msg}");
    }

    #[test]
    fn existence_condition_monotone_in_h_and_alpha() {
        // If the condition holds, it keeps holding as h or alpha grows.
        let mut h = 0.51;
        while h < 1.0 {
            let mut a = 0.05;
            while a < 1.0 {
                if existence_condition(h, a, 1) {
                    assert!(existence_condition(h + 0.2_f64.min(0.99 - h), a, 1));
                    assert!(existence_condition(h, a + 0.5 * (1.0 - a), 1));
                }
                a += 0.07;
            }
            h += 0.03;
        }
    }

    #[test]
    fn boundary_of_existence() {
        // d = 2, alpha = 1.2: requires 4H > 0.8, any valid H works.
        assert!(riesz(0.51, 1.2, 2).is_ok());
        // d = 3, alpha = 0.9: requires H > 0.525.
        assert!(riesz(0.52, 0.9, 3).is_err());
        assert!(riesz(0.53, 0.9, 3).is_ok());
    }
}
