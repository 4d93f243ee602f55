//! Fractional integral by product integration.

use crate::grid::{Grid, GridFunction};
use crate::ops::FracOrder;
use crate::special::gamma_pos;

/// Per-cell kernel moments for the weakly singular kernel `(x_i - p)^(a-1)`
/// integrated against the linear hat pair of cell `[x_j, x_{j+1}]`, using
/// cached powers `pa[r] = (r h)^a`, `pa1[r] = (r h)^(a+1)` with `r = i - j`.
///
/// Returns the coefficients of `(f_j, f_{j+1})`.
#[inline]
fn cell_weights(r: usize, h: f64, alpha: f64, pa: &[f64], pa1: &[f64]) -> (f64, f64) {
    let m0 = (pa[r] - pa[r - 1]) / alpha;
    let a = r as f64 * h;
    let m1 = (a * (pa[r] - pa[r - 1]) / alpha - (pa1[r] - pa1[r - 1]) / (alpha + 1.0)) / h;
    (m0 - m1, m1)
}

/// `I^a f` at every node: the kernel `(x-p)^{a-1}/Γ(a)` is integrated
/// exactly against the piecewise-linear interpolant of `f`. Node 0 maps
/// to 0. Exact (to rounding) for affine data.
pub fn frac_integral(f: &GridFunction, order: FracOrder) -> GridFunction {
    let grid = f.grid();
    let n = grid.n();
    let h = grid.h();
    let alpha = order.alpha();
    let v = f.values();

    let (pa, pa1) = power_tables(n, h, alpha);
    let inv_gamma = 1.0 / gamma_pos(alpha);

    let mut out = vec![0.0; n];
    for i in 1..n {
        let mut acc = 0.0;
        for j in 0..i {
            let (wl, wr) = cell_weights(i - j, h, alpha, &pa, &pa1);
            acc += wl * v[j] + wr * v[j + 1];
        }
        out[i] = inv_gamma * acc;
    }
    GridFunction::new(grid, out).expect("finite quadrature output")
}

/// Dense `n x n` lower-triangular matrix of the same quadrature: row `i`
/// applied to nodal samples reproduces `frac_integral` exactly. Used by the
/// operator assembly.
pub fn frac_integral_matrix(grid: Grid, order: FracOrder) -> Vec<f64> {
    let n = grid.n();
    let h = grid.h();
    let alpha = order.alpha();
    let (pa, pa1) = power_tables(n, h, alpha);
    let inv_gamma = 1.0 / gamma_pos(alpha);

    let mut m = vec![0.0; n * n];
    for i in 1..n {
        let row = &mut m[i * n..(i + 1) * n];
        for j in 0..i {
            let (wl, wr) = cell_weights(i - j, h, alpha, &pa, &pa1);
            row[j] += inv_gamma * wl;
            row[j + 1] += inv_gamma * wr;
        }
    }
    m
}

fn power_tables(n: usize, h: f64, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let pa: Vec<f64> = (0..n).map(|r| (r as f64 * h).powf(alpha)).collect();
    let pa1: Vec<f64> = (0..n).map(|r| (r as f64 * h).powf(alpha + 1.0)).collect();
    (pa, pa1)
}
