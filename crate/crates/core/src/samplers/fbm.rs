//! Exact fractional Brownian motion sampling.
//!
//! The workhorse is circulant embedding of the fractional Gaussian noise
//! autocovariance (Davies-Harte): the n-step increment covariance is
//! embedded in an m x m circulant with m the smallest power of two at least
//! 2(n-1), whose eigenvalues are the DFT of the first row. When every
//! eigenvalue is nonnegative, one complex FFT per path turns i.i.d. normals
//! into an exact draw of the noise, and a cumulative sum yields the motion.
//! For Hurst exponents in (0, 1) the embedding eigenvalues are nonnegative
//! in exact arithmetic; tiny negative values from roundoff (within
//! -1e-10 of the largest eigenvalue) are clipped to zero, anything worse
//! abandons the embedding.
//!
//! The embedding requires a uniform grid anchored so that increments are
//! stationary: grid points t_i = (i + s) * step with s = 0 (the origin is on
//! the grid and the path is pinned there) or s = 1 (the grid starts one step
//! after the origin). Other grids fall back to a dense Cholesky factor of
//! the exact covariance, which is slower but unrestricted.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::covariance::matrix::{build_cov_matrix, CovKind};
use crate::error::{Error, Result};
use crate::params::{KernelFamily, ModelParams};
use crate::quad::QuadratureSpec;
use crate::samplers::ensemble::{fnv1a, GridUnit, PathEnsemble, SampleMethod};
use crate::samplers::gaussian::dense_paths;

/// Relative roundoff budget for circulant eigenvalues: values below
/// `-CLIP_REL * max_eigenvalue` defeat the embedding, larger negatives are
/// clipped to zero.
const CLIP_REL: f64 = 1e-10;

/// Relative tolerance for recognizing a uniform, anchor-aligned grid.
const GRID_TOL: f64 = 1e-9;

/// Exact sampler for a stationary Gaussian sequence via circulant embedding.
///
/// Holds the per-coefficient standard deviations of the spectral
/// representation, so each path costs one vector of normals and one FFT.
pub(crate) struct CirculantSampler {
    m: usize,
    /// `scale[k]` multiplies the k-th complex normal coefficient; built from
    /// the circulant eigenvalues so that the inverse transform has exactly
    /// the target autocovariance.
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

/// Circulant order embedding `n_out` sequence values: the smallest power of
/// two at least `2 (n_out - 1)`. The autocovariance must be tabulated up to
/// lag `embedding_order(n_out) / 2` inclusive.
pub(crate) fn embedding_order(n_out: usize) -> usize {
    (2 * (n_out.max(2) - 1)).next_power_of_two()
}

impl CirculantSampler {
    /// Builds the sampler at the minimal embedding order for `n_out`
    /// values. Returns `Ok(None)` when the embedding has an eigenvalue too
    /// negative to clip, signalling the caller to fall back (or pad).
    pub(crate) fn new(rho: &[f64], n_out: usize) -> Result<Option<Self>> {
        Self::with_order(rho, embedding_order(n_out))
    }

    /// Builds the sampler at an explicit circulant order `m` (a power of
    /// two at least the minimal order), from the autocovariance tabulated
    /// on `0..=m/2`. Larger orders pad the embedding, which restores
    /// nonnegativity for slowly decaying covariances at the price of a
    /// longer transform.
    pub(crate) fn with_order(rho: &[f64], m: usize) -> Result<Option<Self>> {
        if rho.len() < m / 2 + 1 {
            return Err(Error::ParameterDomain(format!(
                "autocovariance table of {} lags cannot fill an embedding of order {m}",
                rho.len()
            )));
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        let mut buf: Vec<Complex<f64>> = (0..m)
            .map(|k| Complex::new(rho[k.min(m - k)], 0.0))
            .collect();
        fft.process(&mut buf);
        let eigen: Vec<f64> = buf.iter().map(|c| c.re).collect();
        let max = eigen.iter().cloned().fold(0.0_f64, f64::max);
        if eigen.iter().any(|&l| l < -CLIP_REL * max) {
            return Ok(None);
        }
        let mut scale = vec![0.0; m];
        for (k, &l) in eigen.iter().enumerate() {
            let l = l.max(0.0);
            // Real coefficients (k = 0 and k = m/2) carry the full
            // eigenvalue; conjugate pairs split it between the real and
            // imaginary normals.
            scale[k] = if k == 0 || k == m / 2 {
                (l / m as f64).sqrt()
            } else {
                (l / (2.0 * m as f64)).sqrt()
            };
        }
        Ok(Some(Self { m, scale, fft }))
    }

    /// Draws one exact realization of the first `n_out` sequence values.
    /// Consumes exactly `m` normals from `rng` in a fixed order, so the
    /// draw is bitwise reproducible for a given rng state.
    pub(crate) fn draw(&self, rng: &mut ChaCha8Rng, n_out: usize) -> Vec<f64> {
        let m = self.m;
        let mut buf = vec![Complex::new(0.0, 0.0); m];
        buf[0] = Complex::new(self.scale[0] * rng.sample::<f64, _>(StandardNormal), 0.0);
        buf[m / 2] = Complex::new(self.scale[m / 2] * rng.sample::<f64, _>(StandardNormal), 0.0);
        for k in 1..m / 2 {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            buf[k] = Complex::new(self.scale[k] * re, self.scale[k] * im);
            buf[m - k] = buf[k].conj();
        }
        self.fft.process(&mut buf);
        buf[..n_out].iter().map(|c| c.re).collect()
    }
}

/// Uniform-grid geometry accepted by the embedding: step and anchor offset
/// (0 when the grid starts at the origin, 1 when it starts one step after).
pub(crate) struct AnchoredGrid {
    pub step: f64,
    pub offset: usize,
}

/// Recognizes grids of the form `t_i = (i + s) * step`, `s` in {0, 1}.
pub(crate) fn anchored_uniform(grid: &[f64]) -> Option<AnchoredGrid> {
    if grid.len() < 2 {
        return grid.first().map(|&t| {
            if t == 0.0 {
                AnchoredGrid { step: 1.0, offset: 0 }
            } else {
                AnchoredGrid { step: t, offset: 1 }
            }
        });
    }
    let step = grid[1] - grid[0];
    if !(step > 0.0) {
        return None;
    }
    let offset = if grid[0].abs() <= GRID_TOL * step {
        0
    } else if (grid[0] - step).abs() <= GRID_TOL * step {
        1
    } else {
        return None;
    };
    let uniform = grid
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= GRID_TOL * step);
    uniform.then_some(AnchoredGrid { step, offset })
}

/// Autocovariance of fractional Gaussian noise at lag `k` for step `step`
/// and Hurst exponent `g`: the second difference of `t^{2g}` around the lag.
pub(crate) fn fgn_autocov(g: f64, step: f64, k: usize) -> f64 {
    let k = k as f64;
    let two_g = 2.0 * g;
    0.5 * step.powf(two_g) * ((k + 1.0).powf(two_g) - 2.0 * k.powf(two_g) + (k - 1.0).abs().powf(two_g))
}

/// Internal fBm engine shared by the public sampler and the pinned-field
/// sampler: returns the flat row-major path block together with the method
/// that actually ran (embedding, or the dense fallback when the grid is not
/// anchored-uniform or the embedding loses positivity).
pub(crate) fn fbm_paths(
    g: f64,
    grid: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<(Vec<f64>, SampleMethod)> {
    let n = grid.len();
    if let Some(anchor) = anchored_uniform(grid) {
        let n_inc = n - 1 + anchor.offset;
        if n_inc == 0 {
            // The grid is the single point {0}: the motion is identically
            // zero there and no randomness is consumed.
            return Ok((vec![0.0; n_paths], SampleMethod::CirculantEmbedding));
        }
        let m = embedding_order(n_inc);
        let rho: Vec<f64> = (0..=m / 2).map(|k| fgn_autocov(g, anchor.step, k)).collect();
        if let Some(sampler) = CirculantSampler::new(&rho, n_inc)? {
            let mut paths = vec![0.0; n_paths * n];
            paths
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(j, row)| {
                    let mut rng = crate::samplers::seeded_stream(seed, j as u64);
                    let noise = sampler.draw(&mut rng, n_inc);
                    let mut acc = 0.0;
                    if anchor.offset == 0 {
                        row[0] = 0.0;
                        for i in 1..n {
                            acc += noise[i - 1];
                            row[i] = acc;
                        }
                    } else {
                        for i in 0..n {
                            acc += noise[i];
                            row[i] = acc;
                        }
                    }
                });
            return Ok((paths, SampleMethod::CirculantEmbedding));
        }
    }
    // Dense fallback: exact covariance, jittered Cholesky. Any grid works,
    // including one containing the origin (the zero row is regularized by
    // the factorization policy).
    let fallback = fbm_reference_params();
    let cov = build_cov_matrix(
        CovKind::FbmRef(g),
        &fallback,
        grid,
        &QuadratureSpec::default(),
    )?;
    let paths = dense_paths(&cov, n_paths, seed);
    Ok((paths, SampleMethod::Cholesky))
}

/// Placeholder parameter set for covariance kinds that ignore the model
/// (the fBm reference family is parametrized by its own exponent).
fn fbm_reference_params() -> ModelParams {
    ModelParams::new(0.75, 0.5, 1, KernelFamily::Riesz, 1.0)
        .expect("reference parameter set is admissible")
}

/// Samples `n_paths` exact fractional Brownian motion paths with Hurst
/// exponent `g` on `grid`.
///
/// Uses circulant embedding when the grid is uniform and anchored at or one
/// step after the origin; otherwise falls back to a dense Cholesky factor
/// of the exact covariance (recorded in the ensemble's `method`). Paths are
/// seeded per-index from the master seed, so path `j` is the same whatever
/// `n_paths` is requested.
pub fn sample_fbm(g: f64, grid: &[f64], n_paths: usize, seed: u64) -> Result<PathEnsemble> {
    if !(g > 0.0 && g < 1.0) {
        return Err(Error::ParameterDomain(format!(
            "fBm exponent must lie in (0, 1), got {g}"
        )));
    }
    if n_paths == 0 {
        return Err(Error::ParameterDomain("n_paths must be positive".to_string()));
    }
    validate_sample_grid(grid, false)?;
    let (paths, method) = fbm_paths(g, grid, n_paths, seed)?;
    let fingerprint = fnv1a(
        [0xfb_u64, g.to_bits()]
            .into_iter()
            .chain(grid.iter().map(|t| t.to_bits())),
    );
    PathEnsemble::new(
        grid.to_vec(),
        GridUnit::Time,
        paths,
        seed,
        method,
        fingerprint,
        None,
    )
}

/// Common validation for sampling grids: nonempty, finite, strictly
/// increasing, and (unless `allow_negative`) nonnegative.
pub(crate) fn validate_sample_grid(grid: &[f64], allow_negative: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::ParameterDomain("sampling grid is empty".to_string()));
    }
    if !grid.iter().all(|t| t.is_finite()) {
        return Err(Error::ParameterDomain(
            "sampling grid contains non-finite points".to_string(),
        ));
    }
    if !allow_negative && grid[0] < 0.0 {
        return Err(Error::ParameterDomain(format!(
            "sampling grid must be nonnegative, starts at {}",
            grid[0]
        )));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::ParameterDomain(
            "sampling grid must be strictly increasing".to_string(),
        ));
    }
    Ok(())
}
