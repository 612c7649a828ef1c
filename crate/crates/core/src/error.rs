//! Crate-wide error type.
//!
//! Numerical routines report *how* they failed, not just that they failed:
//! nonconvergent quadratures carry their refinement trace, oscillatory
//! transforms carry the partial sums accumulated before giving up, and
//! factorization failures carry the jitter that was already applied. Tests
//! and the verification battery rely on these payloads to distinguish a
//! genuinely divergent integral from a tolerance set too tight.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A model or routine parameter is outside its admissible range.
    #[error("parameter out of range: {0}")]
    ParameterDomain(String),

    /// The existence condition d < 4H + alpha fails; no mild solution exists.
    #[error("existence condition d < 4H + alpha violated: d = {d}, 4H + alpha = {value:.6}")]
    ExistenceViolation { d: u32, value: f64 },

    /// The requested operation has no exact path for this kernel family.
    #[error("unsupported kernel for {operation}: {reason}")]
    UnsupportedKernel {
        operation: &'static str,
        reason: &'static str,
    },

    /// A quadrature refinement loop stopped before meeting its tolerance.
    /// `trace` holds the successive refinement estimates.
    #[error("quadrature did not converge after {} refinements (last estimates {:?})", trace.len(), last_of(trace))]
    QuadratureNonconvergence { trace: Vec<f64> },

    /// An oscillatory transform's accelerated tail failed to settle.
    /// `partial_sums` holds the partial sums accumulated so far.
    #[error("oscillatory integral did not settle after {} half-period terms", partial_sums.len())]
    OscillatoryFailure { partial_sums: Vec<f64> },

    /// Cholesky factorization failed even after the jitter escalation policy.
    #[error("covariance factorization failed (final jitter {final_jitter:.3e})")]
    FactorizationFailure { final_jitter: f64 },

    /// A requested lag is not representable on the ensemble grid.
    #[error("lag {lag} is not a grid separation (grid step {step})")]
    LagNotOnGrid { lag: f64, step: f64 },

    /// A modulus window is too small for the grid resolution.
    #[error("window {eps} spans fewer than {min_steps} grid steps (step {step})")]
    WindowUnderresolved { eps: f64, step: f64, min_steps: usize },

    /// The parameters are not in the smooth spatial regime.
    #[error("not in the smooth regime: 2H - (d - alpha)/2 = {exponent:.4} <= 1")]
    RegimeNotSmooth { exponent: f64 },

    /// The conditioning block of a Schur complement is singular.
    #[error("singular conditioning block: {0}")]
    SingularConditioning(String),

    /// Input/output failure while reading or writing ensembles or tables.
    #[error("io error: {0}")]
    Io(String),

    /// A serialized artifact has an invalid or foreign layout.
    #[error("format error: {0}")]
    Format(String),

    /// An estimator was invoked on data that cannot support it.
    #[error("estimator input invalid: {0}")]
    EstimatorInput(String),
}

fn last_of(trace: &[f64]) -> Vec<f64> {
    let n = trace.len();
    trace[n.saturating_sub(3)..].to_vec()
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
