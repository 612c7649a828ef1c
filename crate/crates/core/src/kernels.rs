//! Spatial correlation kernels of the driving noise, on both sides of the
//! Fourier transform.
//!
//! The noise is white-in-nothing: fractional in time, and spatially
//! homogeneous with spectral measure `mu(dxi) = w(|xi|) dxi` where the weight
//! `w` is one of
//!
//! * Riesz: `w(r) = r^(-alpha)`, scale free, singular at the origin, with the
//!   real-space Fourier pair `gamma_{alpha,d} |x|^(alpha - d)`;
//! * Bessel: `w(r) = (1 + r^2)^(-alpha/2)`, bounded, matching the Riesz decay
//!   at high frequency but flat near zero (no real-space power law).
//!
//! Only `0 < alpha < d` is admitted, so the real-space kernel (when it
//! exists) is a locally integrable positive function.

use crate::constants::riesz_fourier_constant;
use crate::error::{Error, Result};
use crate::params::KernelFamily;

/// A validated spatial weight: family, exponent, and dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralWeight {
    kernel: KernelFamily,
    alpha: f64,
    d: u32,
}

impl SpectralWeight {
    pub fn new(kernel: KernelFamily, alpha: f64, d: u32) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::ParameterDomain(format!(
                "spatial dimension must be 1, 2, or 3, got {d}"
            )));
        }
        if !(alpha > 0.0 && alpha < d as f64) {
            return Err(Error::ParameterDomain(format!(
                "weight exponent must satisfy 0 < alpha < d, got alpha = {alpha}, d = {d}"
            )));
        }
        Ok(Self { kernel, alpha, d })
    }

    pub fn kernel(&self) -> KernelFamily {
        self.kernel
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Radial spectral density `w(|xi|)` at radius `r >= 0`. The Riesz weight
    /// diverges at the origin (returned as `+inf`); it is integrable there,
    /// and all quadratures in this crate treat it through its exponent rather
    /// than pointwise evaluation at zero.
    pub fn eval(&self, r: f64) -> f64 {
        match self.kernel {
            KernelFamily::Riesz => r.powf(-self.alpha),
            KernelFamily::Bessel => (1.0 + r * r).powf(-0.5 * self.alpha),
        }
    }

    /// Real-space correlation kernel at distance `r > 0`, i.e. the Fourier
    /// transform of the weight without the `(2 pi)^(-d)` normalization:
    /// `gamma_{alpha,d} r^(alpha - d)` for Riesz. The Bessel weight has no
    /// elementary transform and is reported as unsupported.
    pub fn real_kernel(&self, r: f64) -> Result<f64> {
        match self.kernel {
            KernelFamily::Riesz => {
                if !(r > 0.0) {
                    return Err(Error::ParameterDomain(format!(
                        "real-space Riesz kernel needs r > 0, got {r}"
                    )));
                }
                Ok(riesz_fourier_constant(self.d, self.alpha) * r.powf(self.alpha - self.d as f64))
            }
            KernelFamily::Bessel => Err(Error::UnsupportedKernel {
                operation: "real-space kernel",
                reason: "the Bessel weight has no elementary Fourier transform",
            }),
        }
    }
}
