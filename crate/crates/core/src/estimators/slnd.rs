//! Conditional variances for local-nondeterminism diagnostics.
//!
//! Strong local nondeterminism lower-bounds the variance of the field at a
//! point conditional on its values at any finite set of other points by a
//! power of the distance to the nearest of them. The quantity itself is a
//! Schur complement of the joint covariance matrix:
//!
//! `Var(u(x) | u(y_1), ..., u(y_m)) = C(x, x) - c^T K^{-1} c`
//!
//! with `K` the conditioning block and `c` the cross-covariances. The
//! complement is evaluated by a Cholesky solve of `K`; when the block is
//! numerically singular (near-duplicate conditioning points), a relative
//! diagonal jitter is escalated over a few decades before giving up, and
//! the result is clamped at zero so roundoff can never report a negative
//! variance.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::covariance::matrix::CovMatrix;
use crate::error::{Error, Result};

/// Relative jitter ladder applied to the conditioning block when its
/// plain Cholesky factorization fails.
const JITTER_LADDER: [f64; 4] = [0.0, 1e-12, 1e-10, 1e-8];

/// Variance of the coordinate `target` of the Gaussian vector with
/// covariance `cov`, conditional on the coordinates in `conditioning`.
///
/// An empty conditioning set returns the unconditional variance. The
/// target may not appear among the conditioning indices (the answer would
/// be an uninformative zero); indices must address the matrix.
pub fn slnd_conditional_variance(
    cov: &CovMatrix,
    target: usize,
    conditioning: &[usize],
) -> Result<f64> {
    let n = cov.n();
    if target >= n {
        return Err(Error::EstimatorInput(format!(
            "target index {target} is out of range for a {n}-point covariance"
        )));
    }
    if let Some(&bad) = conditioning.iter().find(|&&i| i >= n) {
        return Err(Error::EstimatorInput(format!(
            "conditioning index {bad} is out of range for a {n}-point covariance"
        )));
    }
    if conditioning.contains(&target) {
        return Err(Error::EstimatorInput(format!(
            "target index {target} is also a conditioning index"
        )));
    }
    let values = cov.values();
    let variance = values[(target, target)];
    if conditioning.is_empty() {
        return Ok(variance);
    }

    let m = conditioning.len();
    let block = DMatrix::from_fn(m, m, |r, c| values[(conditioning[r], conditioning[c])]);
    let cross = DVector::from_fn(m, |r, _| values[(target, conditioning[r])]);
    let scale = block.diagonal().mean().max(f64::MIN_POSITIVE);

    for &level in &JITTER_LADDER {
        let mut attempt = block.clone();
        for i in 0..m {
            attempt[(i, i)] += level * scale;
        }
        if let Some(chol) = Cholesky::new(attempt) {
            let solved = chol.solve(&cross);
            let explained = cross.dot(&solved);
            return Ok((variance - explained).max(0.0));
        }
    }
    Err(Error::SingularConditioning(format!(
        "conditioning block of order {m} stayed indefinite through relative jitter {:e}",
        JITTER_LADDER[JITTER_LADDER.len() - 1]
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::matrix::{build_cov_matrix, CovKind};
    use crate::params::{KernelFamily, ModelParams};
    use crate::quad::QuadratureSpec;

    fn params() -> ModelParams {
        ModelParams::new(0.7, 0.5, 1, KernelFamily::Riesz, 1.0).unwrap()
    }

    #[test]
    fn empty_conditioning_returns_the_diagonal() {
        let cov = build_cov_matrix(
            CovKind::TimeSlice,
            &params(),
            &[0.25, 0.5, 0.75, 1.0],
            &QuadratureSpec::default(),
        )
        .unwrap();
        let v = slnd_conditional_variance(&cov, 2, &[]).unwrap();
        assert_eq!(v, cov.values()[(2, 2)]);
    }

    #[test]
    fn conditioning_never_increases_the_variance() {
        let grid: Vec<f64> = (1..=8).map(|i| i as f64 / 8.0).collect();
        let cov = build_cov_matrix(CovKind::TimeSlice, &params(), &grid, &QuadratureSpec::default()).unwrap();
        let free = slnd_conditional_variance(&cov, 6, &[]).unwrap();
        let mut previous = free;
        // Growing the conditioning set can only explain more variance.
        for take in 1..=5 {
            let idx: Vec<usize> = (0..take).collect();
            let v = slnd_conditional_variance(&cov, 6, &idx).unwrap();
            assert!(v >= 0.0);
            assert!(v <= previous * (1.0 + 1e-12));
            previous = v;
        }
        assert!(previous < free);
    }

    #[test]
    fn a_near_duplicate_conditioning_point_pins_the_value() {
        // Conditioning on a point a hair away from the target leaves
        // essentially nothing unexplained.
        let sep = 1e-6;
        let grid = [0.25, 0.5, 0.5 + sep, 0.75];
        let cov =
            build_cov_matrix(CovKind::SpaceSlice(1.0), &params(), &grid, &QuadratureSpec::default()).unwrap();
        let v = slnd_conditional_variance(&cov, 1, &[2]).unwrap();
        let free = slnd_conditional_variance(&cov, 1, &[]).unwrap();
        assert!(v >= 0.0);
        assert!(
            v <= 1e-3 * free,
            "conditional variance {v} vs unconditional {free}"
        );
    }

    #[test]
    fn schur_complement_matches_the_two_point_formula() {
        let grid = [0.25, 0.5, 1.0];
        let cov = build_cov_matrix(CovKind::TimeSlice, &params(), &grid, &QuadratureSpec::default()).unwrap();
        let vals = cov.values();
        let v = slnd_conditional_variance(&cov, 0, &[2]).unwrap();
        let by_hand = vals[(0, 0)] - vals[(0, 2)] * vals[(0, 2)] / vals[(2, 2)];
        assert!((v - by_hand).abs() <= 1e-12 * by_hand.abs().max(1.0));
    }

    #[test]
    fn bad_indices_are_rejected() {
        let cov = build_cov_matrix(CovKind::TimeSlice, &params(), &[0.5, 1.0], &QuadratureSpec::default()).unwrap();
        assert!(matches!(
            slnd_conditional_variance(&cov, 5, &[0]),
            Err(Error::EstimatorInput(_))
        ));
        assert!(matches!(
            slnd_conditional_variance(&cov, 1, &[3]),
            Err(Error::EstimatorInput(_))
        ));
        assert!(matches!(
            slnd_conditional_variance(&cov, 1, &[1]),
            Err(Error::EstimatorInput(_))
        ));
    }
}
