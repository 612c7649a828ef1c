//! Exact-in-law samplers for the solution field's canonical slices.
//!
//! Three views of the field are sampled, each by the fastest method whose
//! exactness survives the grid and kernel at hand:
//!
//! * the **pinned component** `t -> U(t)`, whose scale-free law reduces to
//!   a constant multiple of fractional Brownian motion under the
//!   homogeneous weight, unlocking circulant embedding on anchored uniform
//!   grids;
//! * the **time slice** `t -> u(t, x0)`, nonstationary with no structural
//!   shortcut, sampled through the dense factor of its exact covariance;
//! * the **space slice** `x -> u(t, x)` at fixed `t > 0`, stationary, so
//!   uniform one-dimensional grids admit circulant embedding of the
//!   covariance sequence and arbitrary one-dimensional grids admit the
//!   randomized spectral series.
//!
//! Every sampler records the method that actually ran: when a structured
//! route declines (grid not anchored-uniform, embedding loses positivity),
//! the ensemble's `method` reads `Cholesky`, which is both the fallback and
//! the warning. Grids containing `t = 0` are handled by factoring the
//! positive-time submatrix and pinning the origin column to exactly zero,
//! so the pinning invariant holds bitwise, not just in law.

use rayon::prelude::*;

use crate::covariance::matrix::{build_cov_matrix, CovKind};
use crate::covariance::pinned::c0_constant;
use crate::covariance::spatial::spatial_covariance;
use crate::error::{Error, Result};
use crate::params::{KernelFamily, ModelParams};
use crate::quad::QuadratureSpec;
use crate::samplers::ensemble::{fnv1a, GridUnit, PathEnsemble, SampleMethod};
use crate::samplers::fbm::{
    anchored_uniform, embedding_order, fbm_paths, validate_sample_grid, CirculantSampler,
};
use crate::samplers::gaussian::dense_paths;
use crate::samplers::series::SpectralSeries;

/// Largest grid the dense-factor route accepts; beyond it the O(n^3)
/// factorization and O(n^2)-per-path products stop being interactive and a
/// structured method should be used instead.
pub const CHOLESKY_GRID_CAP: usize = 1 << 11;

/// How many times the space-slice embedding order may be doubled beyond
/// minimal in search of a nonnegative circulant: x8 recovers positivity
/// comfortably for the slice's slowly decaying covariance, while keeping
/// the covariance table (one quadrature per lag) affordable.
const EMBEDDING_PAD_DOUBLINGS: u32 = 3;

/// Fingerprint of a sampler's target law: a route tag, the model
/// parameters, any extra scalars (such as the slice time), and the grid.
fn law_fingerprint(tag: u64, params: &ModelParams, extra: &[f64], grid: &[f64]) -> u64 {
    let kernel_code = match params.kernel() {
        KernelFamily::Riesz => 0_u64,
        KernelFamily::Bessel => 1,
    };
    fnv1a(
        [
            tag,
            params.h().to_bits(),
            params.alpha().to_bits(),
            params.d() as u64,
            kernel_code,
            params.t_horizon().to_bits(),
        ]
        .into_iter()
        .chain(extra.iter().map(|v| v.to_bits()))
        .chain(grid.iter().map(|v| v.to_bits())),
    )
}

fn check_cholesky_cap(n: usize) -> Result<()> {
    if n > CHOLESKY_GRID_CAP {
        return Err(Error::ParameterDomain(format!(
            "grid of {n} points exceeds the dense-factor cap of {CHOLESKY_GRID_CAP}; \
             use a circulant or series method"
        )));
    }
    Ok(())
}

fn validate_time_grid(params: &ModelParams, grid: &[f64]) -> Result<()> {
    validate_sample_grid(grid, false)?;
    let last = *grid.last().unwrap();
    if last > params.t_horizon() * (1.0 + 1e-12) {
        return Err(Error::ParameterDomain(format!(
            "grid extends to {last}, beyond the model horizon {}",
            params.t_horizon()
        )));
    }
    Ok(())
}

/// Dense-factor sampling of a time-indexed covariance kind on a grid that
/// may include the pinned origin: the factor is built on the positive
/// times, and the origin column is written as exactly zero.
fn dense_time_paths(
    kind: CovKind,
    params: &ModelParams,
    grid: &[f64],
    n_paths: usize,
    seed: u64,
    q: &QuadratureSpec,
) -> Result<Vec<f64>> {
    check_cholesky_cap(grid.len())?;
    let pinned_origin = grid[0] == 0.0;
    let positive = if pinned_origin { &grid[1..] } else { grid };
    if positive.is_empty() {
        return Ok(vec![0.0; n_paths]);
    }
    let cov = build_cov_matrix(kind, params, positive, q)?;
    let inner = dense_paths(&cov, n_paths, seed);
    if !pinned_origin {
        return Ok(inner);
    }
    let n = grid.len();
    let mut full = vec![0.0; n_paths * n];
    full.par_chunks_mut(n)
        .zip(inner.par_chunks(n - 1))
        .for_each(|(row, src)| row[1..].copy_from_slice(src));
    Ok(full)
}

/// Samples the pinned component `U` on `time_grid`.
///
/// `Cholesky` factors the exact pinned covariance (grids up to
/// [`CHOLESKY_GRID_CAP`]). `CirculantEmbedding` uses the reduction of `U`
/// to a constant multiple of fractional Brownian motion, which is exact
/// only for the scale-free weight, and needs a uniform grid anchored at or
/// one step after the origin — other grids fall back to the dense factor,
/// recorded in the ensemble's `method`. The spectral series does not apply
/// to a nonstationary process and is rejected.
pub fn sample_pinned_u(
    params: &ModelParams,
    time_grid: &[f64],
    n_paths: usize,
    seed: u64,
    method: SampleMethod,
    q: &QuadratureSpec,
) -> Result<PathEnsemble> {
    if n_paths == 0 {
        return Err(Error::ParameterDomain("n_paths must be positive".to_string()));
    }
    validate_time_grid(params, time_grid)?;
    let fingerprint = law_fingerprint(0x50, params, &[], time_grid);
    let build = |paths, used| {
        PathEnsemble::new(
            time_grid.to_vec(),
            GridUnit::Time,
            paths,
            seed,
            used,
            fingerprint,
            None,
        )
    };
    match method {
        SampleMethod::SpectralSeries => Err(Error::ParameterDomain(
            "the pinned component is not stationary; the spectral series does not apply"
                .to_string(),
        )),
        SampleMethod::Cholesky => {
            let paths = dense_time_paths(CovKind::PinnedU, params, time_grid, n_paths, seed, q)?;
            build(paths, SampleMethod::Cholesky)
        }
        SampleMethod::CirculantEmbedding => {
            if params.kernel() != KernelFamily::Riesz {
                return Err(Error::UnsupportedKernel {
                    operation: "sample_pinned_u",
                    reason: "the fractional-Brownian reduction is exact only for the \
                             scale-free weight",
                });
            }
            if anchored_uniform(time_grid).is_some() {
                let c0 = c0_constant(params, q)?;
                let (mut paths, used) = fbm_paths(params.gamma(), time_grid, n_paths, seed)?;
                paths.iter_mut().for_each(|v| *v *= c0);
                build(paths, used)
            } else {
                let paths =
                    dense_time_paths(CovKind::PinnedU, params, time_grid, n_paths, seed, q)?;
                build(paths, SampleMethod::Cholesky)
            }
        }
    }
}

/// Samples the time slice `t -> u(t, x0)` on `time_grid` through the dense
/// factor of its exact covariance. The slice is nonstationary and not
/// self-similar, so no structured method applies; grids are capped at
/// [`CHOLESKY_GRID_CAP`] points. A leading grid point at `t = 0` is pinned
/// to exactly zero.
pub fn sample_time_slice(
    params: &ModelParams,
    time_grid: &[f64],
    n_paths: usize,
    seed: u64,
    q: &QuadratureSpec,
) -> Result<PathEnsemble> {
    if n_paths == 0 {
        return Err(Error::ParameterDomain("n_paths must be positive".to_string()));
    }
    validate_time_grid(params, time_grid)?;
    let paths = dense_time_paths(CovKind::TimeSlice, params, time_grid, n_paths, seed, q)?;
    PathEnsemble::new(
        time_grid.to_vec(),
        GridUnit::Time,
        paths,
        seed,
        SampleMethod::Cholesky,
        law_fingerprint(0x71, params, &[], time_grid),
        None,
    )
}

/// Samples the spatial slice `x -> u(t, x)` at fixed `t > 0` on
/// `space_grid` (one coordinate per point; multi-dimensional models read
/// the grid as positions along a line, which the isotropic law permits).
///
/// `Cholesky` works for every kernel and dimension up to the grid cap.
/// `CirculantEmbedding` needs `d = 1` and a uniform grid (any anchor — the
/// slice is stationary), embedding the covariance sequence directly; a
/// nonuniform grid or an embedding that loses positivity falls back to the
/// dense factor, recorded in `method`. `SpectralSeries` needs `d = 1`,
/// works on any grid, and records its truncation bias in the ensemble.
pub fn sample_space_slice(
    params: &ModelParams,
    t: f64,
    space_grid: &[f64],
    n_paths: usize,
    seed: u64,
    method: SampleMethod,
    q: &QuadratureSpec,
) -> Result<PathEnsemble> {
    if n_paths == 0 {
        return Err(Error::ParameterDomain("n_paths must be positive".to_string()));
    }
    if !(t > 0.0) || t > params.t_horizon() * (1.0 + 1e-12) {
        return Err(Error::ParameterDomain(format!(
            "slice time must lie in (0, {}], got {t}",
            params.t_horizon()
        )));
    }
    validate_sample_grid(space_grid, true)?;
    let fingerprint = law_fingerprint(0x5b, params, &[t], space_grid);
    let build = |paths, used, bias| {
        PathEnsemble::new(
            space_grid.to_vec(),
            GridUnit::Space,
            paths,
            seed,
            used,
            fingerprint,
            bias,
        )
    };
    let dense = |n_paths, seed| -> Result<Vec<f64>> {
        check_cholesky_cap(space_grid.len())?;
        let cov = build_cov_matrix(CovKind::SpaceSlice(t), params, space_grid, q)?;
        Ok(dense_paths(&cov, n_paths, seed))
    };
    match method {
        SampleMethod::Cholesky => build(dense(n_paths, seed)?, SampleMethod::Cholesky, None),
        SampleMethod::CirculantEmbedding => {
            if params.d() != 1 {
                return Err(Error::ParameterDomain(format!(
                    "circulant embedding of the spatial slice needs d = 1, got d = {}",
                    params.d()
                )));
            }
            let n = space_grid.len();
            let step = match uniform_gap(space_grid) {
                Some(step) => step,
                None => return build(dense(n_paths, seed)?, SampleMethod::Cholesky, None),
            };
            // The slice has long-range dependence, so the minimal circulant
            // embedding is usually indefinite; padding the order dilutes
            // the wrap-around and restores nonnegativity quickly. The
            // covariance table is extended incrementally across attempts.
            let mut rho: Vec<f64> = Vec::new();
            let mut sampler = None;
            for doublings in 0..=EMBEDDING_PAD_DOUBLINGS {
                let m = embedding_order(n) << doublings;
                let extension: Vec<f64> = (rho.len()..=m / 2)
                    .into_par_iter()
                    .map(|k| spatial_covariance(params, t, k as f64 * step, q))
                    .collect::<Result<_>>()?;
                rho.extend(extension);
                sampler = CirculantSampler::with_order(&rho, m)?;
                if sampler.is_some() {
                    break;
                }
            }
            match sampler {
                Some(sampler) => {
                    let mut paths = vec![0.0; n_paths * n];
                    paths.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
                        let mut rng = crate::samplers::seeded_stream(seed, j as u64);
                        row.copy_from_slice(&sampler.draw(&mut rng, n));
                    });
                    build(paths, SampleMethod::CirculantEmbedding, None)
                }
                None => build(dense(n_paths, seed)?, SampleMethod::Cholesky, None),
            }
        }
        SampleMethod::SpectralSeries => {
            if params.d() != 1 {
                return Err(Error::ParameterDomain(format!(
                    "the spectral series needs d = 1, got d = {}",
                    params.d()
                )));
            }
            let (min_gap, extent) = grid_geometry(space_grid);
            let series = SpectralSeries::build(params, t, min_gap, extent, q)?;
            let paths = series.paths(space_grid, n_paths, seed);
            build(paths, SampleMethod::SpectralSeries, Some(series.bias()))
        }
    }
}

/// The common gap of a uniform grid with arbitrary anchor, or `None`.
fn uniform_gap(grid: &[f64]) -> Option<f64> {
    if grid.len() < 2 {
        return Some(1.0);
    }
    let step = grid[1] - grid[0];
    grid.windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step)
        .then_some(step)
}

/// Smallest adjacent gap and total span of a grid, with single-point grids
/// given unit geometry (only the variance matters there).
fn grid_geometry(grid: &[f64]) -> (f64, f64) {
    if grid.len() < 2 {
        return (1.0, 1.0);
    }
    let min_gap = grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    (min_gap, grid[grid.len() - 1] - grid[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::pinned::pinned_covariance;
    use crate::covariance::temporal::temporal_covariance;

    fn riesz(h: f64, alpha: f64, d: u32) -> ModelParams {
        ModelParams::new(h, alpha, d, KernelFamily::Riesz, 2.0).unwrap()
    }

    fn empirical_cov(e: &PathEnsemble, i: usize, j: usize) -> f64 {
        let n = e.n_paths() as f64;
        let (mut si, mut sj, mut sij) = (0.0, 0.0, 0.0);
        for p in e.iter_paths() {
            si += p[i];
            sj += p[j];
            sij += p[i] * p[j];
        }
        sij / n - (si / n) * (sj / n)
    }

    fn cov_tol(var_i: f64, var_j: f64, cov: f64, n: usize) -> f64 {
        4.0 * ((var_i * var_j + cov * cov) / n as f64).sqrt()
    }

    #[test]
    fn time_slice_pins_the_origin_and_matches_its_covariance() {
        let params = riesz(0.7, 0.5, 1);
        let q = QuadratureSpec::default();
        let grid = [0.0, 0.5, 1.0, 2.0];
        let n = 12_000;
        let e = sample_time_slice(&params, &grid, n, 21, &q).unwrap();
        assert_eq!(e.method(), SampleMethod::Cholesky);
        for p in e.iter_paths() {
            assert_eq!(p[0], 0.0);
        }
        for (i, j) in [(1, 1), (2, 2), (1, 3), (2, 3)] {
            let exact = temporal_covariance(&params, grid[i], grid[j], &q).unwrap();
            let var_i = temporal_covariance(&params, grid[i], grid[i], &q).unwrap();
            let var_j = temporal_covariance(&params, grid[j], grid[j], &q).unwrap();
            let emp = empirical_cov(&e, i, j);
            assert!(
                (emp - exact).abs() < cov_tol(var_i, var_j, exact, n),
                "({i},{j}): {emp} vs {exact}"
            );
        }
    }

    #[test]
    fn pinned_routes_agree_in_law() {
        let params = riesz(0.7, 0.5, 1);
        let q = QuadratureSpec::default();
        let grid: Vec<f64> = (0..8).map(|i| i as f64 * 0.25).collect();
        let n = 12_000;
        let chol = sample_pinned_u(&params, &grid, n, 3, SampleMethod::Cholesky, &q).unwrap();
        let circ =
            sample_pinned_u(&params, &grid, n, 4, SampleMethod::CirculantEmbedding, &q).unwrap();
        assert_eq!(chol.method(), SampleMethod::Cholesky);
        assert_eq!(circ.method(), SampleMethod::CirculantEmbedding);
        for e in [&chol, &circ] {
            for p in e.iter_paths() {
                assert_eq!(p[0], 0.0, "pinning must be exact");
            }
        }
        for (i, j) in [(3, 3), (7, 7), (3, 7)] {
            let exact = pinned_covariance(&params, grid[i], grid[j], &q).unwrap();
            let var_i = pinned_covariance(&params, grid[i], grid[i], &q).unwrap();
            let var_j = pinned_covariance(&params, grid[j], grid[j], &q).unwrap();
            let tol = cov_tol(var_i, var_j, exact, n);
            let emp_c = empirical_cov(&chol, i, j);
            let emp_f = empirical_cov(&circ, i, j);
            assert!((emp_c - exact).abs() < tol, "dense ({i},{j}): {emp_c} vs {exact}");
            assert!((emp_f - exact).abs() < tol, "circulant ({i},{j}): {emp_f} vs {exact}");
        }
    }

    #[test]
    fn pinned_sampler_rejects_or_falls_back_as_documented() {
        let q = QuadratureSpec::default();
        let bessel = ModelParams::new(0.7, 0.5, 1, KernelFamily::Bessel, 2.0).unwrap();
        let grid = [0.0, 0.5, 1.0];
        assert!(matches!(
            sample_pinned_u(&bessel, &grid, 2, 0, SampleMethod::CirculantEmbedding, &q),
            Err(Error::UnsupportedKernel { .. })
        ));
        let params = riesz(0.7, 0.5, 1);
        assert!(sample_pinned_u(&params, &grid, 2, 0, SampleMethod::SpectralSeries, &q).is_err());
        // A non-anchored grid cannot use the embedding; the ensemble records
        // the dense fallback.
        let offgrid = [0.5, 0.8, 1.7];
        let e = sample_pinned_u(&params, &offgrid, 2, 0, SampleMethod::CirculantEmbedding, &q)
            .unwrap();
        assert_eq!(e.method(), SampleMethod::Cholesky);
        // Beyond the horizon is rejected.
        assert!(sample_pinned_u(&params, &[0.0, 3.0], 2, 0, SampleMethod::Cholesky, &q).is_err());
    }

    #[test]
    fn space_slice_methods_share_one_law() {
        let params = riesz(0.6, 0.5, 1);
        let q = QuadratureSpec::default();
        let grid: Vec<f64> = (0..9).map(|i| i as f64 * 0.125).collect();
        let t = 1.0;
        let n = 12_000;
        let chol =
            sample_space_slice(&params, t, &grid, n, 5, SampleMethod::Cholesky, &q).unwrap();
        let circ =
            sample_space_slice(&params, t, &grid, n, 6, SampleMethod::CirculantEmbedding, &q)
                .unwrap();
        let series =
            sample_space_slice(&params, t, &grid, n, 7, SampleMethod::SpectralSeries, &q).unwrap();
        assert_eq!(circ.method(), SampleMethod::CirculantEmbedding);
        assert_eq!(series.method(), SampleMethod::SpectralSeries);
        let bias = series.series_bias().expect("series records its bias");
        assert!(bias > 0.0 && bias < 1e-3);
        assert!(chol.series_bias().is_none());
        let var = spatial_covariance(&params, t, 0.0, &q).unwrap();
        for (i, j) in [(0, 0), (0, 4), (0, 8), (2, 6)] {
            let exact = spatial_covariance(&params, t, grid[j] - grid[i], &q).unwrap();
            let tol = cov_tol(var, var, exact, n);
            for (name, e) in [("dense", &chol), ("circulant", &circ), ("series", &series)] {
                let emp = empirical_cov(e, i, j);
                assert!(
                    (emp - exact).abs() < tol,
                    "{name} ({i},{j}): {emp} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn space_slice_guards_its_preconditions() {
        let params = riesz(0.6, 0.5, 1);
        let q = QuadratureSpec::default();
        let grid = [0.0, 0.5];
        assert!(sample_space_slice(&params, 0.0, &grid, 2, 0, SampleMethod::Cholesky, &q).is_err());
        assert!(sample_space_slice(&params, 5.0, &grid, 2, 0, SampleMethod::Cholesky, &q).is_err());
        let d2 = ModelParams::new(0.8, 1.5, 2, KernelFamily::Riesz, 2.0).unwrap();
        assert!(matches!(
            sample_space_slice(&d2, 1.0, &grid, 2, 0, SampleMethod::CirculantEmbedding, &q),
            Err(Error::ParameterDomain(_))
        ));
        assert!(matches!(
            sample_space_slice(&d2, 1.0, &grid, 2, 0, SampleMethod::SpectralSeries, &q),
            Err(Error::ParameterDomain(_))
        ));
        // d = 2 dense sampling is supported.
        let e = sample_space_slice(&d2, 1.0, &grid, 50, 1, SampleMethod::Cholesky, &q).unwrap();
        assert_eq!(e.n_paths(), 50);
        // A nonuniform grid falls back from the embedding to the dense factor.
        let jagged = [0.0, 0.25, 1.0];
        let e =
            sample_space_slice(&params, 1.0, &jagged, 2, 0, SampleMethod::CirculantEmbedding, &q)
                .unwrap();
        assert_eq!(e.method(), SampleMethod::Cholesky);
    }

    #[test]
    fn dense_grid_cap_is_enforced_before_any_work() {
        let params = riesz(0.7, 0.5, 1);
        let q = QuadratureSpec::default();
        let big: Vec<f64> = (0..=(CHOLESKY_GRID_CAP as u32)).map(|i| i as f64 * 1e-4).collect();
        let err = sample_time_slice(&params, &big, 1, 0, &q);
        assert!(matches!(err, Err(Error::ParameterDomain(_))));
    }
}
