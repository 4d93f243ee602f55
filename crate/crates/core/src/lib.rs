//! Numerical solvers for a one-dimensional space-fractional Stefan problem
//! with homogeneous Dirichlet boundary conditions and a Caputo flux law.
//!
//! The library is organised bottom-up:
//!
//! * [`grid`] — uniform grids on the reference interval `[0,1]` and sampled
//!   grid functions,
//! * [`special`] — gamma, log-gamma, beta and the two-parameter
//!   Mittag-Leffler function,
//! * [`ops`] — product-integration discretizations of the fractional
//!   integral, the Caputo and Riemann-Liouville derivatives, a Leibniz-rule
//!   evaluator, a coercivity-identity splitter, and the assembled dense
//!   matrix for `(d/dx) D^α` with Dirichlet conditions,
//! * [`resolvent`] — the closed-form Mittag-Leffler solution of
//!   `λu − (d/dx)D^α u = g`, used as an analytic oracle,
//! * [`mbp`] — implicit-Euler time stepping for the moving-boundary problem
//!   with a prescribed front, in front-fixed coordinates,
//! * [`stefan`] — the free-boundary solver: fixed-point iteration of the
//!   front update map, the integral form of the Stefan condition as a
//!   residual, a generalized Gronwall bound, and monotone-dependence checks.
//!
//! All solver state is immutable once built; every public entry point is a
//! pure function of its inputs, so concurrent use needs no synchronization.

// Indexed loops over coupled node/matrix arrays read better than iterator
// chains in the quadrature kernels; coefficient tables quote published
// digits past f64 precision.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::excessive_precision)]

pub mod error;
pub mod grid;
pub mod linalg;
pub mod mbp;
pub mod ops;
pub mod resolvent;
pub mod special;
pub mod stefan;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};
pub use ops::{FracOrder, OperatorMatrix};
