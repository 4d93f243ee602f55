//! Experiment CLI for the space-fractional Stefan solvers: configuration
//! ingestion, run orchestration, CSV emission, and growth-curve fitting.
//!
//! The binary is `fracstef <mode> --config <path> [--out <dir>]`; this
//! library holds everything behind it so the parsers are testable (and
//! fuzzable) in isolation.

pub mod config;
pub mod fit;
pub mod output;
pub mod run;
pub mod samples;

use thiserror::Error;

/// CLI-level errors, mapped onto the exit-code contract:
/// 0 all invariant flags pass, 1 flag failure or I/O, 2 validation or
/// parse errors, 3 solver non-convergence.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Solver(#[from] fracstef_core::Error),
}

impl CliError {
    /// Machine-readable error class for the report.
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Validation(_) => "validation",
            CliError::Io(_) => "io",
            CliError::Solver(e) => match e {
                fracstef_core::Error::Convergence { .. }
                | fracstef_core::Error::Step(_)
                | fracstef_core::Error::SingularResolvent { .. } => "solver",
                _ => "validation",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            "parse" | "validation" => 2,
            "solver" => 3,
            _ => 1,
        }
    }
}
