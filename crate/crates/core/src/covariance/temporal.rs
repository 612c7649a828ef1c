//! Covariance of the solution on the time axis at a fixed spatial point.
//!
//! For the Riesz weight the spatial spectral integral collapses to a power of
//! the accumulated heat time, `K a^(-p)` with `p = (d - alpha)/2`, and the
//! remaining double time integral reduces exactly to one dimension: with
//! `c = t - s >= 0`, `g = 2H - 2`, and `e = 1 - p`,
//!
//! ```text
//!   R(t, s) = alpha_H (2 pi)^(-d) K * I(t, s),
//!   I(t, s) = (1/2e) int_{-s}^{t} |w|^g [ (t+s-|w|)^e - |t-s-w|^e ] dw,
//! ```
//!
//! obtained by substituting the increment `w = u - v` and the heat time
//! `sigma = (t-u) + (s-v)` in the defining double integral (the Jacobian is
//! 1/2 and `sigma` ranges over `[|c - w|, t + s - |w|]`). The integrand is a
//! product of at most two algebraic singularities, so it splits into five
//! canonical pieces, each a graded power-weight quadrature with the other
//! factor smooth, one of them a Beta function in closed form. When `p = 1`
//! (only reachable at `d - alpha = 2`) the bracket degenerates to a
//! logarithm; the same happens in the limit `e -> 0`, so a log branch takes
//! over for `|e|` below 1e-5, where the power branch would lose accuracy to
//! cancellation between `O(1/e)` halves.
//!
//! The integral converges exactly when `p < 2H`, i.e. `d < 4H + alpha` — the
//! existence condition enforced by [`ModelParams`].
//!
//! On uniform time grids [`temporal_matrix`] fills the full covariance matrix
//! by sweeping anti-diagonals (where `t + s` is constant) and diagonals
//! (where `t - s` is constant) with incremental one-cell Gauss-Kronrod
//! updates, so an n x n fill costs O(n^2) smooth cell quadratures instead of
//! O(n^2) full graded ones.

use nalgebra::DMatrix;
use rayon::prelude::*;
use statrs::function::gamma::{digamma, gamma};

use crate::constants::{alpha_h, gaussian_radial_constant, inv_two_pi_pow};
use crate::error::{Error, Result};
use crate::params::{KernelFamily, ModelParams};
use crate::quad::{adaptive_gk, power_weight_integral, QuadratureSpec};

/// Euler-Mascheroni constant (statrs exposes digamma; gamma_E = -digamma(1)).
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Threshold on `|1 - p|` below which the logarithmic branch replaces the
/// power branch. Near the threshold both branches carry a relative error of
/// order 1e-5 * |log| from, respectively, cancellation amplification and the
/// dropped `O(e log^2)` term; everywhere else accuracy is quadrature-limited.
const LOG_BRANCH_EPS: f64 = 1e-5;

struct Reduction {
    /// `2H - 2`, the exponent of the time-increment kernel.
    g: f64,
    /// `1 - p` with `p = (d - alpha)/2`.
    e: f64,
    /// `alpha_H (2 pi)^(-d) K_{d,alpha}`.
    prefactor: f64,
}

impl Reduction {
    fn new(params: &ModelParams) -> Result<Self> {
        if params.kernel() != KernelFamily::Riesz {
            return Err(Error::UnsupportedKernel {
                operation: "temporal covariance",
                reason: "the time-axis reduction needs the scale-free Riesz weight; \
                         the Bessel weight admits no power-law heat-time collapse",
            });
        }
        let d = params.d();
        let alpha = params.alpha();
        let p = 0.5 * (d as f64 - alpha);
        Ok(Self {
            g: 2.0 * params.h() - 2.0,
            e: 1.0 - p,
            prefactor: alpha_h(params.h()) * inv_two_pi_pow(d) * gaussian_radial_constant(d, alpha),
        })
    }

    fn log_branch(&self) -> bool {
        self.e.abs() < LOG_BRANCH_EPS
    }

    /// The reduced integral `I(t, s)` for `t >= s > 0`.
    fn reduced(&self, t: f64, s: f64, q: &QuadratureSpec) -> Result<f64> {
        let (g, e) = (self.g, self.e);
        let c = t - s;
        let sum = t + s;
        if self.log_branch() {
            // I = (1/2) int |w|^g [ ln(t+s-|w|) - ln|c-w| ] dw.
            let a1 = power_weight_integral(|w| (sum - w).ln(), t, g, false, &[s], q)?;
            let a2 = power_weight_integral(|z| (sum - z).ln(), s, g, false, &[], q)?;
            let (b1, b2, b3) = if c == 0.0 {
                // int_0^s z^g ln z dz, twice; the middle piece vanishes.
                let b = power_weight_integral(|_| 1.0, s, g, true, &[], q)?;
                (b, 0.0, b)
            } else {
                let b1 = power_weight_integral(|z| (c + z).ln(), s, g, false, &[c], q)?;
                // int_0^c w^g ln(c - w) dw in closed form via the digamma:
                // c^(g+1) [ ln c - (psi(g+2) + gamma_E) ] / (g + 1).
                let a = g + 1.0;
                let b2 = c.powf(a) * (c.ln() - (digamma(a + 1.0) + EULER_GAMMA)) / a;
                let b3 = power_weight_integral(|z| (c + z).powf(g), s, 0.0, true, &[c], q)?;
                (b1, b2, b3)
            };
            Ok(0.5 * (a1 + a2 - b1 - b2 - b3))
        } else {
            let a1 = power_weight_integral(|w| (sum - w).powf(e), t, g, false, &[s], q)?;
            let a2 = power_weight_integral(|z| (sum - z).powf(e), s, g, false, &[], q)?;
            let (b1, b2, b3) = if c == 0.0 {
                // Both side pieces collapse to the exact power integral
                // int_0^s z^(g+e) dz; the middle piece vanishes.
                let b = s.powf(g + e + 1.0) / (g + e + 1.0);
                (b, 0.0, b)
            } else {
                let b1 = power_weight_integral(|z| (c + z).powf(e), s, g, false, &[c], q)?;
                // int_0^c w^g (c-w)^e dw = c^(g+e+1) B(g+1, e+1).
                let b2 = c.powf(g + e + 1.0) * gamma(g + 1.0) * gamma(e + 1.0)
                    / gamma(g + e + 2.0);
                let b3 = power_weight_integral(|z| (c + z).powf(g), s, e, false, &[c], q)?;
                (b1, b2, b3)
            };
            Ok((a1 + a2 - b1 - b2 - b3) / (2.0 * e))
        }
    }
}

fn validate_time(label: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::ParameterDomain(format!(
            "{label} must be finite and nonnegative, got {v}"
        )));
    }
    Ok(())
}

/// `R(t, s) = E[u(t, x) u(s, x)]`, independent of the spatial point `x`.
/// Exact zero when either time is zero (the field starts from zero).
pub fn temporal_covariance(
    params: &ModelParams,
    t: f64,
    s: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    validate_time("t", t)?;
    validate_time("s", s)?;
    let red = Reduction::new(params)?;
    let (t, s) = if t >= s { (t, s) } else { (s, t) };
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok(red.prefactor * red.reduced(t, s, q)?)
}

/// `E[(u(t, x) - u(s, x))^2] = R(t,t) + R(s,s) - 2 R(t,s)`.
pub fn temporal_variogram(
    params: &ModelParams,
    t: f64,
    s: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    let rtt = temporal_covariance(params, t, t, q)?;
    let rss = temporal_covariance(params, s, s, q)?;
    let rts = temporal_covariance(params, t, s, q)?;
    Ok((rtt + rss - 2.0 * rts).max(0.0))
}

// ═══════════════════════════════════════════════════════════════════════
// Dense matrix fill
// ═══════════════════════════════════════════════════════════════════════

/// Detects a uniform grid `t_i = t_0 + i step` with positive entries;
/// returns the step.
fn uniform_step(grid: &[f64]) -> Option<f64> {
    if grid.len() < 3 {
        return None;
    }
    let step = grid[1] - grid[0];
    if !(step > 0.0) {
        return None;
    }
    let uniform = grid
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step);
    (uniform && grid[0] > 0.0).then_some(step)
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::ParameterDomain(
            "time grid must be nonempty".to_string(),
        ));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::ParameterDomain(
                "time grid must be strictly increasing".to_string(),
            ));
        }
    }
    validate_time("grid start", grid[0])?;
    validate_time("grid end", *grid.last().unwrap())
}

/// Dense covariance matrix `R(t_i, t_j)` over a strictly increasing grid of
/// nonnegative times. Uniform grids take the incremental sweep path; general
/// grids fall back to independent entries, parallelized either way.
pub fn temporal_matrix(
    params: &ModelParams,
    grid: &[f64],
    q: &QuadratureSpec,
) -> Result<DMatrix<f64>> {
    validate_grid(grid)?;
    let red = Reduction::new(params)?;
    let n = grid.len();
    if let Some(step) = uniform_step(grid) {
        return sweep_fill(&red, grid, step, q);
    }
    // General grid: one reduced integral per (i <= j) pair.
    let entries: Result<Vec<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut col = vec![0.0; n - j];
            for i in j..n {
                let (t, s) = (grid[i], grid[j]);
                col[i - j] = if s == 0.0 {
                    0.0
                } else {
                    red.prefactor * red.reduced(t, s, q)?
                };
            }
            Ok(col)
        })
        .collect();
    let entries = entries?;
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let v = entries[j][i - j];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Incremental fill on a uniform grid.
///
/// Writing the reduced integral as `(A1 + A2 - B1 - B2 - B3) / 2e` (log
/// branch analogous):
///
/// * `A1 = P(t_i, sigma)`, `A2 = P(t_j, sigma)` with
///   `P(x, sigma) = int_0^x w^g (sigma - w)^e dw` and `sigma = t_i + t_j`
///   constant along anti-diagonals; `P` extends by one smooth cell per step
///   of `x`, and `sigma - x >= s > 0` keeps every cell away from the upper
///   singularity.
/// * `B1 = N(t_j, c)`, `B3 = M(t_j, c)` with
///   `N(x, c) = int_0^x z^g (c + z)^e dz`, `M(x, c) = int_0^x z^e (c + z)^g dz`,
///   and `c = t_i - t_j` constant along diagonals.
/// * `B2` is the closed-form Beta (or digamma) piece, a function of `c` only.
fn sweep_fill(
    red: &Reduction,
    grid: &[f64],
    step: f64,
    q: &QuadratureSpec,
) -> Result<DMatrix<f64>> {
    let n = grid.len();
    let g = red.g;
    let e = red.e;
    let log_branch = red.log_branch();

    // phi_a(w; sigma): the smooth factor of P.
    let phi_a = move |w: f64, sigma: f64| {
        if log_branch {
            (sigma - w).ln()
        } else {
            (sigma - w).powf(e)
        }
    };

    // Anti-diagonal sweeps: for m = i + j, sigma_m = grid[i] + grid[j].
    // P-values are needed at x = grid[l] for l in [max(0, m-n+1), m/2 ... ]:
    // both i and j live on the diagonal, so the sweep covers the full range
    // [lo, hi] with lo = max(0, m - n + 1), hi = min(m, n - 1) ... but P is
    // only consumed at l <= hi; the pairing is (i, j = m - i).
    let a_sweeps: Result<Vec<Vec<f64>>> = (0..=(2 * n - 2))
        .into_par_iter()
        .map(|m| {
            let lo = m.saturating_sub(n - 1);
            let hi = m.min(n - 1);
            let sigma = grid[lo] + grid[hi]; // = grid[i] + grid[m-i] for all i
            let mut vals = Vec::with_capacity(hi - lo + 1);
            // Full graded quadrature at the smallest x on the diagonal.
            let x0 = grid[lo];
            let mut acc = power_weight_integral(
                |w| phi_a(w, sigma),
                x0,
                g,
                false,
                &[sigma - x0],
                q,
            )?;
            vals.push(acc);
            for l in (lo + 1)..=hi {
                let (a, b) = (grid[l - 1], grid[l]);
                acc += adaptive_gk(|w| w.powf(g) * phi_a(w, sigma), a, b, &[], q)?;
                vals.push(acc);
            }
            Ok(vals)
        })
        .collect();
    let a_sweeps = a_sweeps?;

    // Diagonal sweeps: for k = i - j >= 1, c_k = k * step. Produces
    // B1 + B3 at x = grid[j] for all j on the diagonal, plus closed-form B2.
    let b_sweeps: Result<Vec<Vec<f64>>> = (1..n)
        .into_par_iter()
        .map(|k| {
            let c = k as f64 * step;
            let phi_b1 = |z: f64| {
                if log_branch {
                    (c + z).ln()
                } else {
                    (c + z).powf(e)
                }
            };
            let phi_b3 = |z: f64| (c + z).powf(g);
            let mut vals = Vec::with_capacity(n - k);
            let x0 = grid[0];
            let mut acc_b1 = power_weight_integral(&phi_b1, x0, g, false, &[c], q)?;
            let mut acc_b3 = if log_branch {
                power_weight_integral(&phi_b3, x0, 0.0, true, &[c], q)?
            } else {
                power_weight_integral(&phi_b3, x0, e, false, &[c], q)?
            };
            vals.push(acc_b1 + acc_b3);
            for j in 1..(n - k) {
                let (a, b) = (grid[j - 1], grid[j]);
                acc_b1 += adaptive_gk(|z| z.powf(g) * phi_b1(z), a, b, &[], q)?;
                let w_b3 = |z: f64| {
                    if log_branch {
                        z.ln() * phi_b3(z)
                    } else {
                        z.powf(e) * phi_b3(z)
                    }
                };
                acc_b3 += adaptive_gk(w_b3, a, b, &[], q)?;
                vals.push(acc_b1 + acc_b3);
            }
            Ok(vals)
        })
        .collect();
    let b_sweeps = b_sweeps?;

    // Closed-form middle piece per diagonal.
    let b2 = |c: f64| -> f64 {
        if c == 0.0 {
            0.0
        } else if log_branch {
            let a = g + 1.0;
            c.powf(a) * (c.ln() - (digamma(a + 1.0) + EULER_GAMMA)) / a
        } else {
            c.powf(g + e + 1.0) * gamma(g + 1.0) * gamma(e + 1.0) / gamma(g + e + 2.0)
        }
    };

    let scale = if log_branch {
        0.5 * red.prefactor
    } else {
        red.prefactor / (2.0 * e)
    };
    let mut mat = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let m = i + j;
            let lo = m.saturating_sub(n - 1);
            let a_part = a_sweeps[m][i - lo] + a_sweeps[m][j - lo];
            let k = i - j;
            let b_part = if k == 0 {
                if log_branch {
                    2.0 * power_b_diag_log(grid[j], g)
                } else {
                    2.0 * grid[j].powf(g + e + 1.0) / (g + e + 1.0)
                }
            } else {
                b_sweeps[k - 1][j] + b2(k as f64 * step)
            };
            let v = scale * (a_part - b_part);
            mat[(i, j)] = v;
            mat[(j, i)] = v;
        }
    }
    Ok(mat)
}

/// `int_0^x z^g ln z dz = x^(g+1) (ln x - 1/(g+1)) / (g+1)`.
fn power_b_diag_log(x: f64, g: f64) -> f64 {
    let a = g + 1.0;
    x.powf(a) * (x.ln() - 1.0 / a) / a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;

    fn params(h: f64, d: u32, alpha: f64) -> ModelParams {
        ModelParams::new(h, alpha, d, KernelFamily::Riesz, 2.0).unwrap()
    }

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn vanishes_at_time_zero() {
        let p = params(0.7, 1, 0.5);
        assert_eq!(temporal_covariance(&p, 1.0, 0.0, &q()).unwrap(), 0.0);
        assert_eq!(temporal_covariance(&p, 0.0, 0.0, &q()).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_and_positive() {
        let p = params(0.7, 1, 0.5);
        let a = temporal_covariance(&p, 1.0, 0.4, &q()).unwrap();
        let b = temporal_covariance(&p, 0.4, 1.0, &q()).unwrap();
        assert!(a > 0.0);
        assert!((a - b).abs() <= 1e-14 * a);
        // Cauchy-Schwarz.
        let v1 = temporal_covariance(&p, 1.0, 1.0, &q()).unwrap();
        let v2 = temporal_covariance(&p, 0.4, 0.4, &q()).unwrap();
        assert!(a <= (v1 * v2).sqrt());
    }

    #[test]
    fn self_similar_with_exponent_two_gamma() {
        // R(ct, cs) = c^(2 gamma) R(t, s) exactly for the Riesz weight.
        for &(h, d, alpha) in &[(0.7, 1u32, 0.5), (0.6, 2, 1.2), (0.85, 3, 0.8)] {
            let p = params(h, d, alpha);
            let two_gamma = 2.0 * p.gamma();
            let base = temporal_covariance(&p, 1.0, 0.6, &q()).unwrap();
            for &c in &[0.25, 2.0, 7.5] {
                let scaled = temporal_covariance(&p, c * 1.0, c * 0.6, &q()).unwrap();
                let want = c.powf(two_gamma) * base;
                assert!(
                    (scaled - want).abs() <= 1e-7 * want.abs(),
                    "h={h} d={d} alpha={alpha} c={c}: {scaled} vs {want}"
                );
            }
        }
    }

    #[test]
    fn variogram_scales_with_time_regularity() {
        // v(t, s) ~ C |t - s|^(2 gamma) as s -> t: check the log-slope
        // between two small lags approaches 2 gamma.
        let p = params(0.7, 1, 0.5);
        let two_gamma = 2.0 * p.gamma();
        let t = 1.0;
        let v1 = temporal_variogram(&p, t, t - 1e-3, &q()).unwrap();
        let v2 = temporal_variogram(&p, t, t - 2e-3, &q()).unwrap();
        let slope = (v2 / v1).ln() / 2f64.ln();
        assert!(
            (slope - two_gamma).abs() < 0.02,
            "log-slope {slope}, want {two_gamma}"
        );
    }

    #[test]
    fn bessel_weight_is_rejected() {
        let p = ModelParams::new(0.7, 0.5, 1, KernelFamily::Bessel, 2.0).unwrap();
        match temporal_covariance(&p, 1.0, 0.5, &q()) {
            Err(Error::UnsupportedKernel { operation, .. }) => {
                assert_eq!(operation, "temporal covariance");
            }
            other => panic!("expected unsupported kernel, got {other:?}"),
        }
    }

    #[test]
    fn matrix_sweep_matches_entrywise_values() {
        // The incremental uniform-grid fill must agree with independent
        // per-entry quadrature to near machine accuracy.
        let p = params(0.65, 1, 0.5);
        let n = 24;
        let step = 1.0 / n as f64;
        let grid: Vec<f64> = (1..=n).map(|i| i as f64 * step).collect();
        let m = temporal_matrix(&p, &grid, &q()).unwrap();
        for &(i, j) in &[(0usize, 0usize), (5, 3), (23, 0), (23, 22), (17, 17), (11, 2)] {
            let want = temporal_covariance(&p, grid[i], grid[j], &q()).unwrap();
            let got = m[(i, j)];
            assert!(
                (got - want).abs() <= 1e-9 * want.abs().max(1e-12),
                "entry ({i},{j}): sweep {got}, direct {want}"
            );
        }
    }

    #[test]
    fn matrix_accepts_offset_and_nonuniform_grids() {
        let p = params(0.7, 1, 0.5);
        // Offset uniform grid (does not start at the step).
        let grid: Vec<f64> = (0..16).map(|i| 0.5 + 0.05 * i as f64).collect();
        let m = temporal_matrix(&p, &grid, &q()).unwrap();
        let want = temporal_covariance(&p, grid[10], grid[3], &q()).unwrap();
        assert!((m[(10, 3)] - want).abs() <= 1e-9 * want);
        // Non-uniform grid takes the fallback path.
        let grid = [0.1, 0.2, 0.5, 0.9, 1.7];
        let m = temporal_matrix(&p, &grid, &q()).unwrap();
        let want = temporal_covariance(&p, 1.7, 0.2, &q()).unwrap();
        assert!((m[(4, 1)] - want).abs() <= 1e-10 * want.abs().max(1e-12));
        assert_eq!(m[(4, 1)], m[(1, 4)]);
    }

    #[test]
    fn rejects_bad_grids_and_times() {
        let p = params(0.7, 1, 0.5);
        assert!(temporal_covariance(&p, -1.0, 0.5, &q()).is_err());
        assert!(temporal_covariance(&p, f64::NAN, 0.5, &q()).is_err());
        assert!(temporal_matrix(&p, &[0.2, 0.2, 0.3], &q()).is_err());
        assert!(temporal_matrix(&p, &[], &q()).is_err());
    }
}
