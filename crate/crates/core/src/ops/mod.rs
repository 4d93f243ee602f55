//! Discrete fractional operators on grid functions.
//!
//! Everything here is product integration: the singular kernel is integrated
//! exactly against a piecewise-linear (or piecewise-constant slope)
//! interpolant of the data, so endpoint singularities need no ghost points
//! and the power-rule identities hold to the interpolation error.

mod coercivity;
mod derivative;
mod integral;
mod operator;

pub use coercivity::{coercivity_split, CoercivitySplit};
pub use derivative::{caputo, leibniz_rl, rl_deriv, RlDerivative};
pub use integral::frac_integral;
pub use operator::{assemble_operator, OperatorMatrix};

use crate::error::{Error, Result};

/// A fractional order in the open interval `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FracOrder {
    alpha: f64,
}

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!(
                "fractional order must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(FracOrder { alpha })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The complementary order `1 - alpha`, also in `(0, 1)`.
    #[inline]
    pub fn complement(&self) -> FracOrder {
        FracOrder {
            alpha: 1.0 - self.alpha,
        }
    }
}
