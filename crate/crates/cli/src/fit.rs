//! Growth-curve fitting: least squares of `log(s(t) - b)` against `log t`.
//! Diagnostic only; the exponent is reported, never gated on.

use crate::CliError;
use fracstef_core::mbp::BoundaryTrajectory;

#[derive(Clone, Copy, Debug)]
pub struct GrowthFit {
    /// Fitted exponent of `s(t) - b ~ c t^beta`.
    pub beta: f64,
    pub prefactor: f64,
    pub r_squared: f64,
}

/// Fit over samples with `t` inside `window`; requires `s(t) > b` there.
pub fn fit_growth(
    front: &BoundaryTrajectory,
    b: f64,
    window: (f64, f64),
) -> Result<GrowthFit, CliError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, s) in front.times().iter().zip(front.positions()) {
        if *t < window.0 || *t > window.1 || *t <= 0.0 {
            continue;
        }
        let gap = s - b;
        if gap <= 0.0 {
            return Err(CliError::Validation(format!(
                "growth fit needs s(t) > b on the window, got s - b = {gap} at t = {t}"
            )));
        }
        xs.push(t.ln());
        ys.push(gap.ln());
    }
    if xs.len() < 3 {
        return Err(CliError::Validation(format!(
            "growth fit window [{}, {}] holds only {} usable samples",
            window.0,
            window.1,
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(CliError::Validation(
            "growth fit window is degenerate (no time spread)".into(),
        ));
    }
    let beta = sxy / sxx;
    let intercept = my - beta * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (beta * x + intercept);
            e * e
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(GrowthFit {
        beta,
        prefactor: intercept.exp(),
        r_squared,
    })
}
