//! Brute-force oracles, deliberately built from machinery disjoint from the
//! library's quadrature engines: tanh-sinh endpoint quadrature for radial
//! integrals, and plain 2-D trapezoid sums with Richardson extrapolation for
//! the double time integrals. Slow, transparent, and independent — the
//! library's analytically reduced engines are tested against these.

#![allow(dead_code)]

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

/// Tanh-sinh quadrature on [0, b], tolerating an integrable singularity at
/// the origin. The abscissa is computed as an offset from 0 in the
/// cancellation-free form `x = 2r / (1 + e^(-2 sh))`, so nodes approach the
/// singular endpoint down to ~1e-40 instead of stalling at f64 rounding of
/// `a + r(1 + tanh)` — without this the unsampled sliver next to an
/// `x^(-1/2)` singularity costs ~1e-7 absolute. Doubles node density until
/// two consecutive levels agree.
pub fn tanh_sinh_zero<F: Fn(f64) -> f64>(f: F, b: f64, tol: f64) -> f64 {
    let r = 0.5 * b;
    // Deep enough that even an x^(-0.9) singularity leaves a truncation
    // sliver below 1e-12: the closest node sits at ~2r e^(-pi sinh(tau_max)).
    let tau_max = 5.3f64;
    let mut previous = f64::NAN;
    let mut small_diffs = 0;
    let mut last = f64::NAN;
    for level in 2..=14 {
        let h = tau_max / (1u64 << level) as f64;
        let steps = 1u64 << level;
        let mut acc = 0.0;
        for k in 0..=(2 * steps) {
            let tau = -tau_max + k as f64 * h;
            let sh = 0.5 * PI * tau.sinh();
            let x = 2.0 * r / (1.0 + (-2.0 * sh).exp());
            let w = h * r * 0.5 * PI * tau.cosh() / (sh.cosh() * sh.cosh());
            if x <= 0.0 || x >= b || !w.is_finite() || w == 0.0 {
                continue;
            }
            acc += w * f(x);
        }
        // Two consecutive small level-to-level differences guard against a
        // pre-asymptotic coincidence crossing masquerading as convergence.
        if level > 4 && (acc - previous).abs() <= tol * acc.abs().max(1e-300) {
            small_diffs += 1;
            if small_diffs >= 2 {
                return acc;
            }
        } else {
            small_diffs = 0;
        }
        previous = acc;
        last = acc;
    }
    last
}

/// `omega_d int_0^inf r^(d-1-alpha) e^(-a r^2 / 2) dr` with no closed-form
/// shortcuts: tanh-sinh on a truncated range carrying the whole Gaussian mass.
pub fn radial_gaussian_oracle(d: u32, alpha: f64, a: f64) -> f64 {
    let omega = 2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0);
    let g = d as f64 - 1.0 - alpha;
    let cut = (160.0 / a).sqrt();
    omega * tanh_sinh_zero(|r| r.powf(g) * (-0.5 * a * r * r).exp(), cut, 1e-12)
}

/// Result of the extrapolated double-integral oracle.
pub struct OracleValue {
    /// Best extrapolated value.
    pub value: f64,
    /// Drift between the last two extrapolation stages — an empirical error
    /// scale the caller can assert against.
    pub drift: f64,
}

/// Brute-force `int_0^t int_0^s |u - v|^(2H-2) profile((t-u) + (s-v)) du dv`.
///
/// Plain trapezoid on a common step for both axes (so `t/s` must be a small
/// rational), with nodes on the singular diagonal `u = v` zeroed and, when
/// `profile` diverges at 0, the corner `a = 0` zeroed as well. The trapezoid
/// error expands in known powers of h: `h^(2H-1)` and `h^(2H)` from the
/// zeroed diagonal (Navot), and, when `profile(a) ~ a^(-p)` at the corner,
/// `h^(2H-p)` (the corner integrand is homogeneous of degree `2H-2-p`) and
/// `h^(2-p)` (profile singularity against the smooth part of the chord
/// weight). Each known power is removed by a Richardson pass between
/// consecutive dyadic stages; the difference between the two finest fully
/// extrapolated values is reported as an empirical error scale.
pub fn double_time_oracle<P: Fn(f64) -> f64>(
    t: f64,
    s: f64,
    h_exp: f64,
    profile: P,
    corner_singularity: Option<f64>,
    base: usize,
) -> OracleValue {
    let (num, den) = small_ratio(t, s);
    let zero_corner = corner_singularity.is_some();
    let mut exponents = vec![2.0 * h_exp - 1.0, 2.0 * h_exp];
    if let Some(p) = corner_singularity {
        exponents.push(2.0 * h_exp - p);
        exponents.push(2.0 - p);
    } else {
        // With a smooth profile the plain Euler-Maclaurin h^2 term is the
        // leading residual after the two Navot passes (and is amplified by
        // the small-denominator pass at 2H-1), so remove it too.
        exponents.push(2.0);
    }
    exponents.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Nearly coincident exponents cannot be separated at these resolutions;
    // one pass removes the merged term well enough.
    exponents.dedup_by(|a, b| (*a - *b).abs() < 0.02);
    let stages = exponents.len() + 2;
    let mut stage_values = Vec::new();
    for stage in 0..stages {
        let n = base << stage;
        let n_u = num * n;
        let n_v = den * n;
        let h = t / n_u as f64;
        debug_assert!((s / n_v as f64 - h).abs() < 1e-12 * h);

        // ker[k] = (k h)^(2H - 2), diagonal zeroed.
        let mut ker = vec![0.0; n_u.max(n_v) + 1];
        for (k, v) in ker.iter_mut().enumerate().skip(1) {
            *v = (k as f64 * h).powf(2.0 * h_exp - 2.0);
        }
        // prof[m] = profile((N - m) h) with N = n_u + n_v; corner m = N.
        let n_sum = n_u + n_v;
        let mut prof = vec![0.0; n_sum + 1];
        for (m, v) in prof.iter_mut().enumerate() {
            if m == n_sum {
                *v = if zero_corner { 0.0 } else { profile(0.0) };
            } else {
                *v = profile((n_sum - m) as f64 * h);
            }
        }

        let mut acc = 0.0;
        for i in 0..=n_u {
            let wi = if i == 0 || i == n_u { 0.5 } else { 1.0 };
            let mut row = 0.0;
            for j in 0..=n_v {
                let wj = if j == 0 || j == n_v { 0.5 } else { 1.0 };
                row += wj * ker[i.abs_diff(j)] * prof[i + j];
            }
            acc += wi * row;
        }
        stage_values.push(acc * h * h);
    }

    // Successive Richardson passes at the known error exponents; the two
    // finest fully extrapolated values bound the residual empirically.
    let mut values = stage_values;
    for q in exponents {
        let r = q.exp2();
        values = values
            .windows(2)
            .map(|w| (r * w[1] - w[0]) / (r - 1.0))
            .collect();
    }
    OracleValue {
        value: values[1],
        drift: (values[1] - values[0]).abs(),
    }
}

/// Finds small integers (a, b) with t/s = a/b, needed for a common trapezoid
/// step. Panics if the ratio is not a small rational — oracle grids are
/// chosen to satisfy this.
fn small_ratio(t: f64, s: f64) -> (usize, usize) {
    for b in 1..=16 {
        let a = t / s * b as f64;
        if (a - a.round()).abs() < 1e-9 && a.round() >= 1.0 && a.round() <= 16.0 {
            return (a.round() as usize, b);
        }
    }
    panic!("oracle times {t}, {s} are not in small rational ratio");
}

/// Brute-force temporal covariance of the solution field (Riesz weight):
/// `alpha_H (2 pi)^(-d) int int |u-v|^(2H-2) radial((t-u)+(s-v)) du dv`
/// with the radial spectral integral evaluated by tanh-sinh, tabulated over
/// the anti-diagonal values it is actually needed at.
pub fn temporal_covariance_oracle(h: f64, d: u32, alpha: f64, t: f64, s: f64) -> OracleValue {
    let alpha_h = h * (2.0 * h - 1.0);
    let norm = alpha_h * (2.0 * PI).powi(-(d as i32));
    // Cache radial values: the profile is only evaluated at multiples of the
    // stage step, but stages differ, so memoize on bits.
    use std::cell::RefCell;
    use std::collections::HashMap;
    let cache: RefCell<HashMap<u64, f64>> = RefCell::new(HashMap::new());
    let profile = |a: f64| -> f64 {
        if a == 0.0 {
            return f64::INFINITY;
        }
        *cache
            .borrow_mut()
            .entry(a.to_bits())
            .or_insert_with(|| radial_gaussian_oracle(d, alpha, a))
    };
    // The profile blows up like a^(-p) at the corner, p = (d - alpha)/2.
    let p = 0.5 * (d as f64 - alpha);
    let raw = double_time_oracle(t, s, h, profile, Some(p), 128);
    OracleValue {
        value: norm * raw.value,
        drift: norm * raw.drift,
    }
}

/// Brute-force heat-kernel double integral
/// `D_t(w) = int_0^t int_0^t |u-v|^(2H-2) e^(-w ((t-u)+(t-v))/2) du dv`,
/// the building block of the spatial spectral density.
pub fn heat_double_oracle(h: f64, t: f64, w: f64, base: usize) -> OracleValue {
    double_time_oracle(t, t, h, |a| (-0.5 * w * a).exp(), None, base)
}
