//! Error type shared across the solver stack.

use thiserror::Error;

/// Errors raised by grid construction, the special functions, and the
/// solvers. Variants map onto the CLI's exit-code contract: `Config`,
/// `Domain`, `GridMismatch` and `Validation` are caller mistakes;
/// `Convergence`, `SingularResolvent` and `Step` are solver failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Iteration budget exhausted. Carries the per-iteration sup-norm
    /// differences so non-convergence is diagnosable after the fact.
    #[error("did not converge: {message}")]
    Convergence {
        message: String,
        residual_history: Vec<f64>,
    },

    #[error("resolvent numerically singular: |E_(a,a)(lambda)| = {ml_magnitude:e}")]
    SingularResolvent { ml_magnitude: f64 },

    #[error("time step failed: {0}")]
    Step(String),

    #[error("grid mismatch: expected {expected} nodes, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("validation error: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
