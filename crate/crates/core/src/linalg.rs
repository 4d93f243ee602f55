//! Dense linear algebra: LU factorization with partial pivoting.
//!
//! The implicit time stepping refactors an (n-2)x(n-2) dense system every
//! step, so this stays allocation-light and row-major throughout.

use crate::error::{Error, Result};

/// Row-major dense LU factorization with partial pivoting.
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl DenseLu {
    /// Factor a row-major `n x n` matrix. A pivot below `1e-300` in absolute
    /// value marks the system singular.
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n, "matrix storage size mismatch");
        let mut piv = vec![0usize; n];
        for col in 0..n {
            let mut p = col;
            let mut pmax = a[col * n + col].abs();
            for row in col + 1..n {
                let v = a[row * n + col].abs();
                if v > pmax {
                    pmax = v;
                    p = row;
                }
            }
            if pmax.is_nan() || pmax <= 1e-300 {
                return Err(Error::Step(format!(
                    "singular linear system (pivot {pmax:e} in column {col})"
                )));
            }
            piv[col] = p;
            if p != col {
                for k in 0..n {
                    a.swap(col * n + k, p * n + k);
                }
            }
            let d = a[col * n + col];
            for row in col + 1..n {
                let m = a[row * n + col] / d;
                a[row * n + col] = m;
                if m != 0.0 {
                    let (upper, lower) = a.split_at_mut(row * n);
                    let src = &upper[col * n + col + 1..col * n + n];
                    let dst = &mut lower[col + 1..n];
                    for (dv, sv) in dst.iter_mut().zip(src) {
                        *dv -= m * sv;
                    }
                }
            }
        }
        Ok(DenseLu { n, lu: a, piv })
    }

    /// Solve in place: `b` holds the right-hand side on entry, the solution
    /// on exit.
    pub fn solve(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        for col in 0..n {
            b.swap(col, self.piv[col]);
        }
        for row in 1..n {
            let mut acc = b[row];
            for col in 0..row {
                acc -= self.lu[row * n + col] * b[col];
            }
            b[row] = acc;
        }
        for row in (0..n).rev() {
            let mut acc = b[row];
            for col in row + 1..n {
                acc -= self.lu[row * n + col] * b[col];
            }
            b[row] = acc / self.lu[row * n + row];
        }
    }
}

/// `y = A x` for a row-major `rows x cols` matrix.
pub fn mat_vec(a: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(x.len(), cols);
    let mut y = vec![0.0; rows];
    for (r, yr) in y.iter_mut().enumerate() {
        let row = &a[r * cols..(r + 1) * cols];
        let mut acc = 0.0;
        for (av, xv) in row.iter().zip(x) {
            acc += av * xv;
        }
        *yr = acc;
    }
    y
}
