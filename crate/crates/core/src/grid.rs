//! Uniform grids on the reference interval `[0,1]` and grid functions.

use crate::error::{Error, Result};

/// A uniform partition of `[0,1]` with `n >= 3` nodes `x_i = i/(n-1)`.
///
/// Moving-boundary fields always live on this reference interval; physical
/// coordinates are recovered by scaling with the front position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("grid needs at least 3 nodes, got {n}")));
        }
        Ok(Grid { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Node spacing `1/(n-1)`.
    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    /// Node coordinate `x_i`. Computed as `i/(n-1)` so `x_0 = 0` and
    /// `x_{n-1} = 1` hold exactly in floating point.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        i as f64 / (self.n - 1) as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }
}

/// Real samples of a field on a [`Grid`]. Values are validated finite at
/// construction and immutable afterwards.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "grid function contains non-finite value {bad}"
            )));
        }
        Ok(GridFunction { grid, values })
    }

    /// Sample a closure at the grid nodes.
    pub fn sample<F: Fn(f64) -> f64>(grid: Grid, f: F) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        GridFunction::new(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Composite trapezoid rule for nodal samples on a uniform grid, returning
/// the integral over the whole interval spanned by `values` with spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let interior: f64 = values[1..values.len() - 1].iter().sum();
    h * (0.5 * values[0] + interior + 0.5 * values[values.len() - 1])
}

/// Running trapezoid integral: `out[i] = ∫_0^{x_i}` of the sampled data.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for i in 1..values.len() {
        out[i] = out[i - 1] + 0.5 * h * (values[i - 1] + values[i]);
    }
    out
}
