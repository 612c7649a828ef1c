//! Covariance matrices on evaluation grids.
//!
//! Every sampler consumes the law through this module: a [`CovMatrix`] holds
//! the assembled covariance values, the minimal diagonal jitter that made the
//! Cholesky factorization succeed, and the factor itself. Assembly memoizes
//! the distinct covariance arguments (stationary kinds need only the grid
//! values and their pairwise gaps) and evaluates them concurrently; the
//! quadrature engines behind the entries are pure, so entry evaluation is
//! embarrassingly parallel.
//!
//! Before any jitter is applied, matrices small enough to afford a full
//! symmetric eigendecomposition are checked to be positive semidefinite up to
//! `-1e-8 * trace/n` — an assembled covariance that fails this is evidence of
//! a broken engine, not of round-off, and is reported as an error rather than
//! silently regularized away.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quad::QuadratureSpec;

use super::pinned::pinned_variogram;
use super::reference::bifbm_covariance;
use super::spatial::spatial_covariance;
use super::temporal::temporal_matrix;

/// Largest size for which the eigenvalue positivity pre-check runs; beyond
/// this the `O(n^3)` decomposition would dominate assembly.
const EIGEN_CHECK_LIMIT: usize = 512;

/// Relative eigenvalue slack: smallest eigenvalue must be at least
/// `-EIGEN_TOL * trace/n`.
const EIGEN_TOL: f64 = 1e-8;

/// First jitter tried, as a fraction of the mean diagonal.
const JITTER_BASE: f64 = 1e-12;

/// Doublings of the jitter before giving up.
const JITTER_DOUBLINGS: u32 = 30;

/// Which law a covariance matrix discretizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CovKind {
    /// Time slice of the solution at a fixed spatial point: entries
    /// `Cov(u(t_i, x), u(t_j, x))` over a grid of times.
    TimeSlice,
    /// Space slice at the given time: entries `Cov(u(t, x_i), u(t, x_j))`
    /// over a grid of 1-D positions (stationary, so only gaps matter).
    SpaceSlice(f64),
    /// Pinned component of the time slice, from its stationary increments:
    /// `(v(t_i) + v(t_j) - v(|t_i - t_j|)) / 2` with `v` the pinned variogram.
    PinnedU,
    /// Bifractional Brownian motion with the given parameters.
    Bifbm { hb: f64, k: f64 },
    /// Fractional Brownian motion with the given Hurst index.
    FbmRef(f64),
}

/// Assembled covariance matrix, its grid, and the factorization record.
#[derive(Clone, Debug)]
pub struct CovMatrix {
    grid: Vec<f64>,
    values: DMatrix<f64>,
    jitter: f64,
    factor: DMatrix<f64>,
}

impl CovMatrix {
    /// The evaluation grid the matrix was assembled on.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// The raw covariance values, before any jitter.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// The diagonal regularizer that was actually applied (0 when the raw
    /// matrix factorized as assembled).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Lower-triangular Cholesky factor of `values + jitter * I`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Number of grid points.
    pub fn n(&self) -> usize {
        self.grid.len()
    }

    /// Writes the matrix as CSV rows `arg_i,arg_j,value` (with header), one
    /// row per ordered pair, using shortest round-trip float formatting.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "arg_i,arg_j,value")?;
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                writeln!(
                    out,
                    "{},{},{}",
                    self.grid[i],
                    self.grid[j],
                    self.values[(i, j)]
                )?;
            }
        }
        Ok(())
    }
}

fn validate_grid(kind: CovKind, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::ParameterDomain(
            "evaluation grid must be nonempty".to_string(),
        ));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::ParameterDomain(
                "evaluation grid must be strictly increasing".to_string(),
            ));
        }
    }
    if !grid.iter().all(|g| g.is_finite()) {
        return Err(Error::ParameterDomain(
            "evaluation grid must be finite".to_string(),
        ));
    }
    // Spatial positions may be negative (the slice is stationary); the other
    // kinds are laws on the time half-axis.
    if !matches!(kind, CovKind::SpaceSlice(_)) && grid[0] < 0.0 {
        return Err(Error::ParameterDomain(format!(
            "time grid must be nonnegative, starts at {}",
            grid[0]
        )));
    }
    Ok(())
}

/// Evaluates `f` once per distinct argument, in parallel, and returns the
/// results keyed by bit pattern.
fn memo_eval<F>(args: &[f64], f: F) -> Result<HashMap<u64, f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let mut distinct: Vec<f64> = args.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    let pairs: Result<Vec<(u64, f64)>> = distinct
        .par_iter()
        .map(|&a| Ok((a.to_bits(), f(a)?)))
        .collect();
    Ok(pairs?.into_iter().collect())
}

/// Fills a symmetric matrix from a stationary two-point rule `value(gap)`
/// memoized over the distinct gaps of the grid.
fn stationary_fill<F>(grid: &[f64], f: F) -> Result<DMatrix<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let n = grid.len();
    let mut gaps = vec![0.0];
    for i in 0..n {
        for j in (i + 1)..n {
            gaps.push(grid[j] - grid[i]);
        }
    }
    let table = memo_eval(&gaps, f)?;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        table[&(grid[i] - grid[j]).abs().to_bits()]
    }))
}

/// Assembles the covariance matrix for `kind` over `grid`, verifies positive
/// semidefiniteness (up to round-off, for grids up to 512 points), and
/// factorizes it, doubling a diagonal jitter from `1e-12 * trace/n` until the
/// Cholesky succeeds. The applied jitter is recorded on the result.
pub fn build_cov_matrix(
    kind: CovKind,
    params: &ModelParams,
    grid: &[f64],
    q: &QuadratureSpec,
) -> Result<CovMatrix> {
    validate_grid(kind, grid)?;
    let n = grid.len();
    let values = match kind {
        CovKind::TimeSlice => temporal_matrix(params, grid, q)?,
        CovKind::SpaceSlice(t) => {
            stationary_fill(grid, |gap| spatial_covariance(params, t, gap, q))?
        }
        CovKind::PinnedU => {
            let mut args: Vec<f64> = grid.to_vec();
            for i in 0..n {
                for j in (i + 1)..n {
                    args.push(grid[j] - grid[i]);
                }
            }
            args.push(0.0);
            let v = memo_eval(&args, |a| pinned_variogram(params, a, q))?;
            DMatrix::from_fn(n, n, |i, j| {
                let vi = v[&grid[i].to_bits()];
                let vj = v[&grid[j].to_bits()];
                let vd = v[&(grid[i] - grid[j]).abs().to_bits()];
                0.5 * (vi + vj - vd)
            })
        }
        CovKind::Bifbm { hb, k } => {
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..=i {
                    let v = bifbm_covariance(hb, k, grid[i], grid[j])?;
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            m
        }
        CovKind::FbmRef(g) => {
            if !(g > 0.0 && g < 1.0) {
                return Err(Error::ParameterDomain(format!(
                    "fractional Brownian reference index must lie in (0, 1), got {g}"
                )));
            }
            DMatrix::from_fn(n, n, |i, j| {
                let (t, s) = (grid[i], grid[j]);
                0.5 * (t.powf(2.0 * g) + s.powf(2.0 * g) - (t - s).abs().powf(2.0 * g))
            })
        }
    };
    let mean_diag = values.trace() / n as f64;
    if n <= EIGEN_CHECK_LIMIT {
        let min_eig = values
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -EIGEN_TOL * mean_diag {
            return Err(Error::SingularConditioning(format!(
                "assembled covariance has eigenvalue {min_eig}, below the \
                 -{EIGEN_TOL} * trace/n = {} round-off allowance",
                -EIGEN_TOL * mean_diag
            )));
        }
    }
    // Minimal-jitter factorization: covariances of pinned or degenerate grids
    // are often exactly singular, which is expected, not an engine failure.
    let base = (JITTER_BASE * mean_diag).max(1e-300);
    let mut jitter = 0.0;
    loop {
        let mut regularized = values.clone();
        for i in 0..n {
            regularized[(i, i)] += jitter;
        }
        if let Some(chol) = regularized.cholesky() {
            return Ok(CovMatrix {
                grid: grid.to_vec(),
                values,
                jitter,
                factor: chol.unpack(),
            });
        }
        jitter = if jitter == 0.0 { base } else { 2.0 * jitter };
        if jitter > base * (JITTER_DOUBLINGS as f64).exp2() {
            return Err(Error::FactorizationFailure {
                final_jitter: jitter,
            });
        }
    }
}
