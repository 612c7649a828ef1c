//! Statistical estimators that read the field's law back off sampled
//! ensembles: variogram slopes for the regularity exponents, normalized
//! moduli of continuity for the sharp almost-sure gauges, Schur-complement
//! conditional variances for local nondeterminism, regime-specific
//! structural checks, and a chi-square whitening test that ties every
//! sampler back to its covariance.
//!
//! All estimators are deterministic functions of their input ensemble:
//! path-level work may run in parallel, but reductions happen in a fixed
//! order, so a report is bit-for-bit reproducible for a given ensemble.

pub mod checks;
pub mod modulus;
pub mod slnd;
pub mod variogram;
pub mod whitening;

pub use checks::{self_similarity_check, smoothness_check};
pub use modulus::{modulus_statistic, ModulusNormalizer, ModulusReport};
pub use slnd::slnd_conditional_variance;
pub use variogram::{
    empirical_variogram, fit_exponent, ExponentReport, VariogramEstimate, Verdict,
};
pub use whitening::{whitening_report, WhiteningReport};
