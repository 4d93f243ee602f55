//! Free-boundary solver: fixed-point iteration of the front update map on
//! the admissible set, the integral form of the Stefan condition as a
//! residual, a generalized Gronwall bound, and monotone-dependence checks.

use crate::error::{Error, Result};
use crate::grid::{cumulative_trapezoid, trapezoid, GridFunction};
use crate::mbp::{
    run_diagnostics, solve_mbp, uniform_times, BoundaryTrajectory, SolutionField, StefanParams,
};
use crate::ops::frac_integral;
use crate::special::gamma_pos;

/// A front constrained to the admissible set: Lipschitz with `s(0) = b`
/// and discrete slopes in `[0, m]` (to tolerance). Construction goes
/// through [`BoundaryTrajectory`], which enforces exactly these bounds.
#[derive(Clone, Debug)]
pub struct SigmaFront {
    traj: BoundaryTrajectory,
}

impl SigmaFront {
    pub fn new(traj: BoundaryTrajectory) -> Self {
        SigmaFront { traj }
    }

    pub fn trajectory(&self) -> &BoundaryTrajectory {
        &self.traj
    }
}

/// Controls for the fixed-point iteration.
#[derive(Clone, Copy, Debug)]
pub struct FixedPointOptions {
    /// Convergence when `sup |s_{k+1} - s_k| <= tol_rel * b`.
    pub tol_rel: f64,
    /// Iteration cap per time window.
    pub max_iters: usize,
    /// Initial blend weight for `s <- s + w (Ps - s)`; halved whenever the
    /// raw update grows (the map is continuous, not provably contractive).
    pub damping: f64,
    /// Optional cap on the continuation window length; `None` uses the
    /// self-map bound `b/(2m)`.
    pub max_window: Option<f64>,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            tol_rel: 1e-8,
            max_iters: 50,
            damping: 1.0,
            max_window: None,
        }
    }
}

/// Output of the free-boundary solve.
pub struct StefanSolution {
    pub field: SolutionField,
    pub front: SigmaFront,
    pub iterations: usize,
    /// `sup |s_{k+1} - s_k|` per fixed-point iteration, all windows.
    pub residual_history: Vec<f64>,
    /// Integral-condition residual sampled at the solution times.
    pub integral_residual: Vec<f64>,
}

/// The front update map: from the flux recorded along a front, produce
/// `t -> sqrt(b^2 - 2 ∫_0^t flux(τ) s(τ) dτ)` by trapezoid accumulation.
///
/// A nonpositive radicand cannot occur while the flux is nonpositive; it
/// signals an upstream flux-sign violation and is a domain error.
pub fn apply_front_map(front: &SigmaFront, field: &SolutionField) -> Result<SigmaFront> {
    let traj = front.trajectory();
    if field.trajectory.len() != traj.len() {
        return Err(Error::Validation(
            "field was not solved on the supplied front's time grid".into(),
        ));
    }
    let drift = traj
        .positions()
        .iter()
        .zip(field.trajectory.positions())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if drift > 1e-12 * (1.0 + field.params.b) {
        return Err(Error::Validation(
            "field was solved against a different front".into(),
        ));
    }

    let b = field.params.b;
    let integrand: Vec<f64> = field
        .front_flux
        .iter()
        .zip(traj.positions())
        .map(|(flux, s)| -2.0 * flux * s)
        .collect();
    // Times may be non-uniform across stitched windows; integrate segment
    // by segment.
    let times = traj.times();
    let mut s_new = Vec::with_capacity(times.len());
    let mut acc = b * b;
    s_new.push(b);
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        acc += 0.5 * dt * (integrand[k - 1] + integrand[k]);
        if acc <= 0.0 {
            return Err(Error::Domain(format!(
                "front update radicand {acc} <= 0 at t = {}: flux sign violated upstream",
                times[k]
            )));
        }
        s_new.push(acc.sqrt());
    }
    let updated =
        BoundaryTrajectory::from_positions(times.to_vec(), s_new, b, field.params.m)?;
    Ok(SigmaFront::new(updated))
}

/// Residual of the integral form of the Stefan condition at each sample
/// time:
/// `r(t) = s^2(t) - [ b^2 + 2∫_0^b x u0 - 2∫_0^t I^{1-a}u(s(τ),τ) dτ - 2∫_0^{s(t)} x u(x,t) dx ]`.
///
/// Spatial moments use the trapezoid rule on the physical grid
/// (`x = p s`); the front value of `I^{1-a}u` comes from the reference
/// field via the scaling `I^{1-a}u(s(τ),τ) = s^{1-a}(τ) (I^{1-a}v)(1,τ)`.
pub fn integral_condition_residual(field: &SolutionField, u0: &GridFunction) -> Vec<f64> {
    let grid = u0.grid();
    let h = grid.h();
    let n = grid.n();
    let alpha = field.params.order.alpha();
    let b = field.params.b;
    let traj = &field.trajectory;

    let ref_moment = |v: &GridFunction| -> f64 {
        let integrand: Vec<f64> = grid.nodes().zip(v.values()).map(|(p, w)| p * w).collect();
        trapezoid(&integrand, h)
    };
    let m0 = b * b * ref_moment(u0);

    // q(τ_k) = s^{1-a} (I^{1-a} v)(1).
    let comp = field.params.order.complement();
    let q: Vec<f64> = field
        .v
        .iter()
        .zip(traj.positions())
        .map(|(v, s)| s.powf(1.0 - alpha) * frac_integral(v, comp).value(n - 1))
        .collect();
    let times = traj.times();
    let mut time_int = vec![0.0; times.len()];
    for k in 1..times.len() {
        time_int[k] =
            time_int[k - 1] + 0.5 * (times[k] - times[k - 1]) * (q[k - 1] + q[k]);
    }

    field
        .v
        .iter()
        .zip(traj.positions())
        .enumerate()
        .map(|(k, (v, s))| {
            let m_t = s * s * ref_moment(v);
            s * s - (b * b + 2.0 * m0 - 2.0 * time_int[k] - 2.0 * m_t)
        })
        .collect()
}

/// Free-boundary solve by fixed-point iteration of the front map, with the
/// continuation pattern for long horizons: windows of length `b/(2m)`
/// restarted from the state at the window midpoint.
///
/// Preconditions: `u0 >= 0`, vanishing at both ends, and under the
/// admissible cap `m/(2Γ(1+a)) (b^a - x^a)`.
pub fn solve_stefan(
    params: &StefanParams,
    u0: &GridFunction,
    opts: &FixedPointOptions,
) -> Result<StefanSolution> {
    let grid = params.grid();
    if u0.grid() != grid {
        return Err(Error::GridMismatch {
            expected: grid.n(),
            got: u0.grid().n(),
        });
    }
    let alpha = params.order.alpha();
    let scale = u0.max_abs();
    let amp = params.m / (2.0 * gamma_pos(1.0 + alpha));
    for (p, v) in grid.nodes().zip(u0.values()) {
        let cap = amp * (params.b.powf(alpha) - (params.b * p).powf(alpha));
        if *v > cap + 1e-9 * scale.max(1e-300) {
            return Err(Error::Validation(format!(
                "initial data exceeds the admissible cap at x = {}: {} > {}",
                params.b * p,
                v,
                cap
            )));
        }
    }

    let mut t_cursor = 0.0;
    let mut b_cur = params.b;
    let mut v_cur = u0.clone();
    let mut times_g: Vec<f64> = Vec::new();
    let mut s_g: Vec<f64> = Vec::new();
    let mut flux_g: Vec<f64> = Vec::new();
    let mut fields_g: Vec<GridFunction> = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    let mut iterations = 0usize;

    loop {
        let remaining = params.horizon - t_cursor;
        let mut limit = b_cur / (2.0 * params.m);
        if let Some(cap) = opts.max_window {
            limit = limit.min(cap);
        }
        let last_window = remaining <= limit * (1.0 + 1e-12);
        let window_len = if last_window { remaining } else { limit };

        let mut steps = ((window_len / params.dt).ceil() as usize).max(2);
        if !last_window && steps % 2 == 1 {
            steps += 1;
        }
        let wp = StefanParams::new(
            params.order,
            b_cur,
            params.m,
            window_len,
            params.n,
            window_len / steps as f64,
        )?;

        let (front, field, iters) = solve_window(&wp, &v_cur, opts, &mut history)?;
        iterations += iters;

        let keep = if last_window { steps } else { steps / 2 };
        let wtimes = front.trajectory().times();
        let start = if t_cursor == 0.0 { 0 } else { 1 };
        for k in start..=keep {
            times_g.push(t_cursor + wtimes[k]);
            s_g.push(front.trajectory().positions()[k]);
            flux_g.push(field.front_flux[k]);
            fields_g.push(field.v[k].clone());
        }

        if last_window {
            break;
        }
        t_cursor += window_len / 2.0;
        b_cur = front.trajectory().positions()[keep];
        v_cur = field.v[keep].clone();
    }

    let traj_g = BoundaryTrajectory::from_positions(times_g, s_g, params.b, params.m)?;
    let diagnostics = run_diagnostics(params, &traj_g, &fields_g, &flux_g, u0);
    let field = SolutionField {
        params: *params,
        trajectory: traj_g.clone(),
        v: fields_g,
        front_flux: flux_g,
        diagnostics,
    };
    let integral_residual = integral_condition_residual(&field, u0);
    Ok(StefanSolution {
        field,
        front: SigmaFront::new(traj_g),
        iterations,
        residual_history: history,
        integral_residual,
    })
}

/// Fixed point on one window, starting from the constant front.
fn solve_window(
    wp: &StefanParams,
    u0: &GridFunction,
    opts: &FixedPointOptions,
    history: &mut Vec<f64>,
) -> Result<(SigmaFront, SolutionField, usize)> {
    let steps = (wp.horizon / wp.dt).round() as usize;
    let times = uniform_times(wp.horizon, steps);
    let mut front = SigmaFront::new(BoundaryTrajectory::from_positions(
        times.clone(),
        vec![wp.b; steps + 1],
        wp.b,
        wp.m,
    )?);

    let mut omega = opts.damping;
    let mut raw_prev = f64::INFINITY;
    for it in 1..=opts.max_iters {
        let field = solve_mbp(wp, front.trajectory(), u0)?;
        let mapped = apply_front_map(&front, &field)?;
        let raw: f64 = mapped
            .trajectory()
            .positions()
            .iter()
            .zip(front.trajectory().positions())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if raw > raw_prev {
            omega = (omega / 2.0).max(1.0 / 16.0);
        }
        raw_prev = raw;

        let blended: Vec<f64> = front
            .trajectory()
            .positions()
            .iter()
            .zip(mapped.trajectory().positions())
            .map(|(s, ps)| s + omega * (ps - s))
            .collect();
        let diff: f64 = blended
            .iter()
            .zip(front.trajectory().positions())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        history.push(diff);
        front = SigmaFront::new(BoundaryTrajectory::from_positions(
            times.clone(),
            blended,
            wp.b,
            wp.m,
        )?);

        if diff <= opts.tol_rel * wp.b {
            let field = solve_mbp(wp, front.trajectory(), u0)?;
            return Ok((front, field, it));
        }
    }
    Err(Error::Convergence {
        message: format!(
            "front fixed point did not reach {} within {} iterations",
            opts.tol_rel * wp.b,
            opts.max_iters
        ),
        residual_history: history.clone(),
    })
}

/// A sampled scalar function of time with linear interpolation.
#[derive(Clone, Debug)]
pub struct SampledCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledCurve {
    pub fn value_at(&self, t: f64) -> f64 {
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= *self.times.last().expect("non-empty") {
            return *self.values.last().expect("non-empty");
        }
        let k = self.times.partition_point(|tv| *tv < t) - 1;
        let w = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }
}

/// Generalized Gronwall bound: from
/// `x^p(t) <= n^p(t) + ∫_0^t h x^q`, the majorant
/// `t -> n(t) [1 + (p-q)/p ∫_0^t h(τ) n(τ)^{-(p-q)} dτ]`
/// evaluated by trapezoid quadrature on a fixed fine grid.
pub fn gronwall_bound(
    p: f64,
    q: f64,
    n_fun: impl Fn(f64) -> f64,
    h_fun: impl Fn(f64) -> f64,
    t_end: f64,
) -> Result<SampledCurve> {
    if !(p > q && q >= 0.0) {
        return Err(Error::Domain(format!(
            "gronwall bound requires p > q >= 0, got p = {p}, q = {q}"
        )));
    }
    if t_end.is_nan() || t_end <= 0.0 {
        return Err(Error::Domain(format!("horizon must be positive, got {t_end}")));
    }
    const STEPS: usize = 2048;
    let times = uniform_times(t_end, STEPS);
    let n_vals: Vec<f64> = times.iter().map(|t| n_fun(*t)).collect();
    let h_vals: Vec<f64> = times.iter().map(|t| h_fun(*t)).collect();
    for (k, t) in times.iter().enumerate() {
        if n_vals[k].is_nan() || n_vals[k] <= 0.0 {
            return Err(Error::Domain(format!(
                "majorant data must be positive, n({t}) = {}",
                n_vals[k]
            )));
        }
        if h_vals[k] < 0.0 {
            return Err(Error::Domain(format!(
                "rate data must be nonnegative, h({t}) = {}",
                h_vals[k]
            )));
        }
        if k > 0 && n_vals[k] < n_vals[k - 1] * (1.0 - 1e-12) {
            return Err(Error::Domain("majorant data must be nondecreasing".into()));
        }
    }
    let integrand: Vec<f64> = h_vals
        .iter()
        .zip(&n_vals)
        .map(|(h, n)| h * n.powf(-(p - q)))
        .collect();
    let cum = cumulative_trapezoid(&integrand, t_end / STEPS as f64);
    let values: Vec<f64> = n_vals
        .iter()
        .zip(&cum)
        .map(|(n, c)| n * (1.0 + (p - q) / p * c))
        .collect();
    Ok(SampledCurve { times, values })
}

/// Outcome of a monotone-dependence comparison between two solves.
#[derive(Clone, Copy, Debug)]
pub struct MonotoneReport {
    /// `max_t (s_lower(t) - s_higher(t))`; ordering holds when this is
    /// within tolerance.
    pub max_gap: f64,
    pub at_time: f64,
    pub pass: bool,
}

/// Check ordered data produce ordered fronts: `run_lo` must have
/// `b_lo <= b_hi` and initial data below `run_hi`'s (compared on physical
/// coordinates). Reports `max_t (s_lo - s_hi)` against `tol`.
pub fn monotone_dependence_check(
    run_lo: &StefanSolution,
    run_hi: &StefanSolution,
    tol: f64,
) -> Result<MonotoneReport> {
    let b_lo = run_lo.field.params.b;
    let b_hi = run_hi.field.params.b;
    if b_lo > b_hi * (1.0 + 1e-12) {
        return Err(Error::Validation(format!(
            "runs are not ordered: b_lo = {b_lo} > b_hi = {b_hi}"
        )));
    }
    let u0_lo = &run_lo.field.v[0];
    let u0_hi = &run_hi.field.v[0];
    let grid_lo = u0_lo.grid();
    let hi_at = |x_phys: f64| -> f64 {
        // Linear interpolation of the higher run's initial data at a
        // physical coordinate inside [0, b_hi].
        let p = (x_phys / b_hi).clamp(0.0, 1.0);
        let grid = u0_hi.grid();
        let pos = p * (grid.n() - 1) as f64;
        let j = (pos.floor() as usize).min(grid.n() - 2);
        let w = pos - j as f64;
        u0_hi.value(j) * (1.0 - w) + u0_hi.value(j + 1) * w
    };
    let scale = u0_hi.max_abs().max(u0_lo.max_abs()).max(1e-300);
    for (p, v) in grid_lo.nodes().zip(u0_lo.values()) {
        let x = p * b_lo;
        if *v > hi_at(x) + 1e-9 * scale {
            return Err(Error::Validation(format!(
                "initial data are not ordered at x = {x}"
            )));
        }
    }

    let mut max_gap = f64::NEG_INFINITY;
    let mut at_time = 0.0;
    for (t, s_lo) in run_lo
        .front
        .trajectory()
        .times()
        .iter()
        .zip(run_lo.front.trajectory().positions())
    {
        let gap = s_lo - run_hi.front.trajectory().s_at(*t);
        if gap > max_gap {
            max_gap = gap;
            at_time = *t;
        }
    }
    Ok(MonotoneReport {
        max_gap,
        at_time,
        pass: max_gap <= tol,
    })
}
