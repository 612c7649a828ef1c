//! Normalization constants shared by the covariance engines.
//!
//! Everything here is a plain positive number with a closed expression in
//! gamma functions, collected in one place so the engines and their tests
//! agree on conventions:
//!
//! * `alpha_h(H) = H (2H - 1)` multiplies the fractional time kernel
//!   `|u - v|^(2H - 2)` so that the driving noise has fractional Brownian
//!   time correlation with unit variance at t = 1.
//! * `gaussian_radial_constant` is `K` in
//!   `int_{R^d} |xi|^(-alpha) e^(-a |xi|^2 / 2) dxi = K a^(-(d - alpha)/2)`.
//! * `riesz_fourier_constant` is `gamma_{alpha,d}` in
//!   `int_{R^d} |xi|^(-alpha) e^(i xi.x) dxi = gamma_{alpha,d} |x|^(alpha - d)`.
//! * `fbm_spectral_constant` is `c_gamma` in the spectral density
//!   `c_gamma |tau|^(-1 - 2 gamma)` of fractional Brownian motion normalized
//!   to unit variance at t = 1.
//! * `shape_integral` is `J = int_{R^d} |eta|^(-alpha) / (1 + |eta|^4 / 4) deta`,
//!   the profile integral behind the stationary pinned field's spectral
//!   density. Production code evaluates it by radial quadrature; the closed
//!   form stays available as an independent cross-check.

use statrs::function::gamma::gamma;

use crate::error::Result;
use crate::quad::{power_weight_integral, QuadratureSpec};

use std::f64::consts::PI;

/// `alpha_H = H (2H - 1)`, positive precisely on the rough-time range
/// `H in (1/2, 1)` this crate works in.
pub fn alpha_h(h: f64) -> f64 {
    h * (2.0 * h - 1.0)
}

/// `(2 pi)^(-d)`, the Fourier inversion normalization.
pub fn inv_two_pi_pow(d: u32) -> f64 {
    (2.0 * PI).powi(-(d as i32))
}

/// Surface measure of the unit sphere in `R^d`: 2, 2 pi, 4 pi for d = 1, 2, 3.
pub fn sphere_surface(d: u32) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// `K` in `int |xi|^(-alpha) e^(-a |xi|^2/2) dxi = K a^(-(d - alpha)/2)`:
/// `K = pi^(d/2) 2^((d - alpha)/2) Gamma((d - alpha)/2) / Gamma(d/2)`.
pub fn gaussian_radial_constant(d: u32, alpha: f64) -> f64 {
    let df = d as f64;
    let p = 0.5 * (df - alpha);
    PI.powf(0.5 * df) * p.exp2() * gamma(p) / gamma(0.5 * df)
}

/// `gamma_{alpha,d} = pi^(d/2) 2^(d - alpha) Gamma((d - alpha)/2) / Gamma(alpha/2)`,
/// the constant in the Fourier pair `|xi|^(-alpha) <-> gamma_{alpha,d} |x|^(alpha - d)`
/// (no `(2 pi)^(-d)`; the inverse-transform normalization is applied by callers).
pub fn riesz_fourier_constant(d: u32, alpha: f64) -> f64 {
    let df = d as f64;
    PI.powf(0.5 * df) * (df - alpha).exp2() * gamma(0.5 * (df - alpha)) / gamma(0.5 * alpha)
}

/// `c_gamma = sin(pi gamma) Gamma(1 + 2 gamma) / (2 pi)`: spectral constant of
/// fractional Brownian motion with Hurst index `gamma`, unit variance at 1.
pub fn fbm_spectral_constant(gamma_exp: f64) -> f64 {
    (PI * gamma_exp).sin() * gamma(1.0 + 2.0 * gamma_exp) / (2.0 * PI)
}

/// `J = int_{R^d} |eta|^(-alpha) (1 + |eta|^4/4)^(-1) deta` by radial
/// quadrature: graded rule on [0, R] plus the exact alternating tail series
/// from expanding `(1 + r^4/4)^(-1)` in powers of `r^(-4)`.
pub fn shape_integral(d: u32, alpha: f64, q: &QuadratureSpec) -> Result<f64> {
    let df = d as f64;
    let g = df - 1.0 - alpha;
    let cut = 10.0;
    let head = power_weight_integral(
        |r| 1.0 / (1.0 + 0.25 * r.powi(4)),
        cut,
        g,
        false,
        &[1.0],
        q,
    )?;
    // Tail: sum_k 4 (-4)^k R^(d - alpha - 4 - 4k) / (4 + 4k + alpha - d).
    let mut tail = 0.0;
    let mut coeff = 4.0;
    for k in 0..24 {
        let e = df - alpha - 4.0 - 4.0 * k as f64;
        let term = coeff * cut.powf(e) / (-e);
        tail += term;
        if term.abs() < 1e-18 * head.abs() {
            break;
        }
        coeff *= -4.0;
    }
    Ok(sphere_surface(d) * (head + tail))
}

/// Closed form of [`shape_integral`]:
/// `J = omega_d 2^((d - alpha)/2 - 2) pi / sin(pi (d - alpha) / 4)`.
pub fn shape_integral_closed_form(d: u32, alpha: f64) -> f64 {
    let m = d as f64 - alpha;
    sphere_surface(d) * (0.5 * m - 2.0).exp2() * PI / (0.25 * PI * m).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{adaptive_gk, cos_tail_integral, oscillatory_sum, sinc};

    #[test]
    fn sphere_surfaces_match_low_dimensions() {
        assert!((sphere_surface(1) - 2.0).abs() < 1e-14);
        assert!((sphere_surface(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_surface(3) - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn gaussian_radial_constant_matches_direct_quadrature() {
        // K = omega_d int_0^inf r^(d-1-alpha) e^(-r^2/2) dr  (a = 1).
        let q = QuadratureSpec::default();
        for &(d, alpha) in &[(1u32, 0.5), (2, 1.3), (3, 0.7), (3, 2.5)] {
            let radial = power_weight_integral(
                |r| (-0.5 * r * r).exp(),
                14.0,
                d as f64 - 1.0 - alpha,
                false,
                &[1.0],
                &q,
            )
            .unwrap();
            let got = sphere_surface(d) * radial;
            let want = gaussian_radial_constant(d, alpha);
            assert!(
                (got - want).abs() < 1e-9 * want,
                "d={d} alpha={alpha}: quadrature {got}, closed form {want}"
            );
        }
    }

    #[test]
    fn gaussian_radial_constant_scales_as_power_of_a() {
        // The defining identity at a = 3: quadrature must equal K 3^(-(d-alpha)/2).
        let q = QuadratureSpec::default();
        let (d, alpha, a) = (2u32, 0.8, 3.0f64);
        let radial = power_weight_integral(
            |r| (-0.5 * a * r * r).exp(),
            10.0,
            d as f64 - 1.0 - alpha,
            false,
            &[a.sqrt().recip()],
            &q,
        )
        .unwrap();
        let got = sphere_surface(d) * radial;
        let want = gaussian_radial_constant(d, alpha) * a.powf(-0.5 * (d as f64 - alpha));
        assert!((got - want).abs() < 1e-9 * want);
    }

    #[test]
    fn riesz_fourier_constant_matches_oscillatory_quadrature() {
        // At d = 1, x = 1: int |xi|^(-alpha) e^(i xi) dxi
        //   = 2 int_0^inf xi^(-alpha) cos(xi) dxi = gamma_{alpha,1}.
        let q = QuadratureSpec::default();
        for &alpha in &[0.3, 0.5, 0.8] {
            // Head [0, pi/2] with the singular weight, then half-period
            // segments with Euler acceleration.
            let head = power_weight_integral(
                |x| x.cos(),
                0.5 * PI,
                -alpha,
                false,
                &[],
                &q,
            )
            .unwrap();
            let terms = (0..).map(|k| {
                let a = 0.5 * PI + k as f64 * PI;
                adaptive_gk(|x: f64| x.powf(-alpha) * x.cos(), a, a + PI, &[], &q)
            });
            let osc = oscillatory_sum(terms, &q).unwrap();
            let got = 2.0 * (head + osc);
            let want = riesz_fourier_constant(1, alpha);
            assert!(
                (got - want).abs() < 1e-8 * want,
                "alpha={alpha}: quadrature {got}, closed form {want}"
            );
        }
    }

    #[test]
    fn riesz_fourier_constant_half_order_value() {
        // alpha = 1/2, d = 1 collapses to sqrt(2 pi) because the two gamma
        // factors coincide.
        let want = (2.0 * PI).sqrt();
        assert!((riesz_fourier_constant(1, 0.5) - want).abs() < 1e-13);
    }

    #[test]
    fn fbm_spectral_constant_normalizes_unit_variance() {
        // 4 c_gamma int_0^inf (1 - cos sigma) sigma^(-1-2g) dsigma = 1.
        let q = QuadratureSpec::default();
        for &g in &[0.3, 0.55, 0.75, 0.9] {
            // Head [0, 1]: weight sigma^(1-2g), profile (1-cos)/sigma^2.
            let head = power_weight_integral(
                |s| {
                    let half = 0.5 * s;
                    0.5 * sinc(half) * sinc(half)
                },
                1.0,
                1.0 - 2.0 * g,
                false,
                &[],
                &q,
            )
            .unwrap();
            let t0 = 40.0 * PI;
            let mid = adaptive_gk(
                |s: f64| (1.0 - s.cos()) * s.powf(-1.0 - 2.0 * g),
                1.0,
                t0,
                &(1..40)
                    .map(|k| 2.0 * PI * k as f64)
                    .collect::<Vec<_>>(),
                &q,
            )
            .unwrap();
            let tail = t0.powf(-2.0 * g) / (2.0 * g) - cos_tail_integral(1.0 + 2.0 * g, t0);
            let total = 4.0 * fbm_spectral_constant(g) * (head + mid + tail);
            assert!(
                (total - 1.0).abs() < 1e-8,
                "gamma={g}: normalization integral = {total}"
            );
        }
    }

    #[test]
    fn shape_integral_agrees_with_closed_form() {
        let q = QuadratureSpec::default();
        for &(d, alpha) in &[(1u32, 0.5), (1, 0.2), (2, 1.0), (2, 1.7), (3, 0.5), (3, 2.2)] {
            let got = shape_integral(d, alpha, &q).unwrap();
            let want = shape_integral_closed_form(d, alpha);
            assert!(
                (got - want).abs() < 1e-9 * want,
                "d={d} alpha={alpha}: quadrature {got}, closed form {want}"
            );
        }
    }

    #[test]
    fn alpha_h_positive_on_rough_range() {
        for i in 1..10 {
            let h = 0.5 + 0.05 * i as f64;
            assert!(alpha_h(h) > 0.0);
            assert!(alpha_h(h) < 1.0);
        }
        assert!((alpha_h(0.7) - 0.7 * 0.4).abs() < 1e-15);
    }
}
