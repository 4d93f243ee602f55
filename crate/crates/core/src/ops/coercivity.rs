//! Two-sided quadrature of the coercivity identity
//! `∫ ∂^a w · w = a/(4Γ(1-a)) ∬ |w(x)-w(p)|^2 |x-p|^{-1-a}
//!              + 1/(2Γ(1-a)) ∫ [(1-x)^{-a} + x^{-a}] w^2`.
//!
//! Both sides are returned so tests can compare them; the right side is a
//! sum of nonnegative terms, which gives the sign oracle. The `1/Γ(1-a)`
//! normalization on the double integral is pinned by the closed forms for
//! `w ≡ c` and `w = x` (see the tests): every term of the identity inherits
//! the kernel's `1/Γ(1-a)`.

use crate::grid::{trapezoid, GridFunction};
use crate::ops::derivative::caputo;
use crate::ops::FracOrder;
use crate::special::gamma_pos;

#[derive(Clone, Copy, Debug)]
pub struct CoercivitySplit {
    pub lhs: f64,
    pub rhs: f64,
}

/// Quadrature of both sides of the coercivity identity for an absolutely
/// continuous interpolant of `w`.
///
/// The left side integrates `∂^a w · w` with the singular part
/// `w(0) x^{-a} w(x)/Γ(1-a)` handled by exact kernel moments, so `w(0) != 0`
/// is allowed. The double integral on the right uses product integration in
/// the inner variable against the piecewise-linear interpolant of
/// `(w(x_i) - w(p))^2`, which vanishes at the diagonal.
pub fn coercivity_split(w: &GridFunction, order: FracOrder) -> CoercivitySplit {
    let grid = w.grid();
    let n = grid.n();
    let h = grid.h();
    let alpha = order.alpha();
    let v = w.values();

    // lhs = ∫ D^a w · w + w(0)/Γ(1-a) ∫ x^{-a} w.
    let cap = caputo(w, order);
    let prod: Vec<f64> = cap.values().iter().zip(v).map(|(c, wv)| c * wv).collect();
    let mut lhs = trapezoid(&prod, h);
    if v[0] != 0.0 {
        lhs += v[0] / gamma_pos(1.0 - alpha) * weighted_moment_from_left(v, h, alpha);
    }

    // rhs: boundary-weighted L2 terms with q = w^2 ...
    let q: Vec<f64> = v.iter().map(|x| x * x).collect();
    let q_rev: Vec<f64> = q.iter().rev().copied().collect();
    let mut rhs = (weighted_moment_from_left(&q, h, alpha)
        + weighted_moment_from_left(&q_rev, h, alpha))
        / (2.0 * gamma_pos(1.0 - alpha));

    // ... plus the symmetric double integral.
    let pw1: Vec<f64> = (0..n).map(|r| (r as f64 * h).powf(1.0 - alpha)).collect();
    let pwm: Vec<f64> = (0..n)
        .map(|r| if r == 0 { 0.0 } else { (r as f64 * h).powf(-alpha) })
        .collect();
    let mut double = 0.0;
    for i in 0..n {
        let inner = inner_row(v, i, h, alpha, &pw1, &pwm);
        let wt = if i == 0 || i == n - 1 { 0.5 * h } else { h };
        double += wt * inner;
    }
    rhs += 0.25 * alpha / gamma_pos(1.0 - alpha) * double;

    CoercivitySplit { lhs, rhs }
}

/// `∫_0^{x_i} |x_i - p|^{-1-a} psi(p) dp + ∫_{x_i}^1 |p - x_i|^{-1-a} psi(p) dp`
/// with `psi(p) = (w_i - w(p))^2` interpolated linearly; `psi(x_i) = 0`
/// keeps the adjacent-cell moments finite.
fn inner_row(v: &[f64], i: usize, h: f64, alpha: f64, pw1: &[f64], pwm: &[f64]) -> f64 {
    let n = v.len();
    let wi = v[i];
    let psi = |j: usize| {
        let d = wi - v[j];
        d * d
    };
    let mut acc = 0.0;
    // Cells left of x_i; distance r = i - j from the singular point.
    for j in 0..i {
        let r = i - j;
        acc += cell_pair(psi(j), psi(j + 1), r, h, alpha, pw1, pwm);
    }
    // Cells right of x_i, mirrored: left endpoint of the cell is the nearer.
    for j in i..n - 1 {
        let r = j + 1 - i;
        acc += cell_pair(psi(j + 1), psi(j), r, h, alpha, pw1, pwm);
    }
    acc
}

/// Moment of the linear interpolant with values `(phi_far, phi_near)` at
/// distances `(r h, (r-1) h)` from the singular point, against `u^{-1-a}`.
/// For `r = 1` the near endpoint sits on the singularity where the
/// interpolant vanishes by construction.
#[inline]
fn cell_pair(
    phi_far: f64,
    phi_near: f64,
    r: usize,
    h: f64,
    alpha: f64,
    pw1: &[f64],
    pwm: &[f64],
) -> f64 {
    if r == 1 {
        debug_assert_eq!(phi_near, 0.0);
        return phi_far * pw1[1] / ((1.0 - alpha) * h);
    }
    let a = r as f64 * h;
    let b = (r - 1) as f64 * h;
    let j1 = (pw1[r] - pw1[r - 1]) / (1.0 - alpha);
    let j0 = (pwm[r - 1] - pwm[r]) / alpha;
    (phi_far * (j1 - b * j0) + phi_near * (a * j0 - j1)) / h
}

/// `∫_0^1 x^{-a} q(x) dx` by exact moments of `x^{-a}` against the
/// piecewise-linear interpolant of `q`.
fn weighted_moment_from_left(q: &[f64], h: f64, alpha: f64) -> f64 {
    let n = q.len();
    let mut acc = 0.0;
    for j in 0..n - 1 {
        let c = j as f64 * h;
        let d = (j + 1) as f64 * h;
        let k1 = (d.powf(1.0 - alpha) - c.powf(1.0 - alpha)) / (1.0 - alpha);
        let k2 = (d.powf(2.0 - alpha) - c.powf(2.0 - alpha)) / (2.0 - alpha);
        let slope = (q[j + 1] - q[j]) / h;
        let intercept = q[j] - slope * c;
        acc += intercept * k1 + slope * k2;
    }
    acc
}
