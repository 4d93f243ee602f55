//! Mode execution: single solves, refinement studies, monotonicity sweeps,
//! and the operator check, with CSV artifacts and a report per run.

use crate::config::{FrontKind, InitialData, Mode, RunConfig};
use crate::fit::fit_growth;
use crate::output::{
    fmt_float, render_field_csv, render_front_csv, write_text, Flag, RunReport,
};
use crate::samples::{check_sample_count, parse_samples_str};
use crate::CliError;
use fracstef_core::grid::GridFunction;
use fracstef_core::mbp::{solve_mbp, BoundaryTrajectory, SolutionField, StefanParams};
use fracstef_core::ops::{caputo, frac_integral, FracOrder};
use fracstef_core::special::gamma;
use fracstef_core::stefan::{
    gronwall_bound, integral_condition_residual, monotone_dependence_check, solve_stefan,
    FixedPointOptions, StefanSolution,
};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

pub fn stefan_params(config: &RunConfig) -> Result<StefanParams, CliError> {
    let order = FracOrder::new(config.alpha)?;
    Ok(StefanParams::new(
        order,
        config.b,
        config.m,
        config.horizon,
        config.n,
        config.dt,
    )?)
}

fn initial_data(config: &RunConfig, params: &StefanParams) -> Result<GridFunction, CliError> {
    let grid = params.grid();
    match &config.initial {
        InitialData::Zero => Ok(GridFunction::zeros(grid)),
        InitialData::ScaledCap { theta } => {
            let alpha = params.order.alpha();
            let amp = theta * params.m / (2.0 * gamma(1.0 + alpha)?);
            Ok(GridFunction::sample(grid, |p| {
                amp * (params.b.powf(alpha) - (params.b * p).powf(alpha))
            })?)
        }
        InitialData::Custom { path } => {
            let text = std::fs::read_to_string(path)?;
            let samples = parse_samples_str(&text)?;
            check_sample_count(&samples, grid.n())?;
            Ok(GridFunction::new(grid, samples)?)
        }
    }
}

fn scaled_cap(params: &StefanParams, theta: f64) -> Result<GridFunction, CliError> {
    let alpha = params.order.alpha();
    let amp = theta * params.m / (2.0 * gamma(1.0 + alpha)?);
    Ok(GridFunction::sample(params.grid(), |p| {
        amp * (params.b.powf(alpha) - (params.b * p).powf(alpha))
    })?)
}

fn fixed_point_options(config: &RunConfig) -> FixedPointOptions {
    FixedPointOptions {
        tol_rel: config.fp_tol,
        max_iters: config.fp_max_iters,
        ..FixedPointOptions::default()
    }
}

/// Flags common to any produced field: the solver diagnostics plus the
/// trajectory admissibility margins.
fn field_flags(field: &SolutionField, flags: &mut Vec<Flag>) {
    for check in &field.diagnostics.checks {
        flags.push(Flag::new(check.name.clone(), check.margin, check.tol));
    }
    let params = &field.params;
    let traj = &field.trajectory;
    let slope_min = traj.slopes().iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let slope_max = traj
        .slopes()
        .iter()
        .fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    flags.push(Flag::new("front-slope-lower", -slope_min, 1e-8 * params.m));
    flags.push(Flag::new(
        "front-slope-upper",
        slope_max - params.m,
        1e-8 * params.m,
    ));
    let mut pos_margin = f64::NEG_INFINITY;
    for (t, s) in traj.times().iter().zip(traj.positions()) {
        pos_margin = pos_margin
            .max(params.b - s)
            .max(s - (params.b + params.m * t));
    }
    flags.push(Flag::new(
        "front-position-bounds",
        pos_margin,
        1e-8 * (params.b + params.m * params.horizon),
    ));
}

fn run_solve_stefan(config: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    let params = stefan_params(config)?;
    let u0 = initial_data(config, &params)?;
    let sol = solve_stefan(&params, &u0, &fixed_point_options(config))?;

    let mut report = RunReport {
        config_echo: crate::config::echo(config),
        ..RunReport::default()
    };
    field_flags(&sol.field, &mut report.flags);
    let last_diff = sol.residual_history.last().copied().unwrap_or(0.0);
    report.flags.push(Flag::new(
        "fixed-point-converged",
        last_diff,
        config.fp_tol * params.b,
    ));
    report.residual_history = sol.residual_history.clone();
    let max_r = sol
        .integral_residual
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    report
        .notes
        .push(format!("max integral-condition residual: {max_r:.6e}"));
    report
        .notes
        .push(format!("fixed-point iterations: {}", sol.iterations));

    // Growth diagnostic on the back half of the run, informational only.
    let window = (params.horizon / 4.0, params.horizon);
    match fit_growth(sol.front.trajectory(), params.b, window) {
        Ok(fit) => report.notes.push(format!(
            "growth fit on [{:.3}, {:.3}]: beta = {:.4}, prefactor = {:.4e}, r2 = {:.6}",
            window.0, window.1, fit.beta, fit.prefactor, fit.r_squared
        )),
        Err(e) => report.notes.push(format!("growth fit skipped: {e}")),
    }

    write_text(
        out,
        "front.csv",
        &render_front_csv(&sol.field, &sol.integral_residual),
    )?;
    write_text(
        out,
        "field.csv",
        &render_field_csv(&sol.field, config.field_time_stride, config.field_node_stride),
    )?;
    Ok(report)
}

fn run_solve_mbp(config: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    let params = stefan_params(config)?;
    let u0 = initial_data(config, &params)?;
    let steps = (params.horizon / params.dt).round().max(1.0) as usize;
    let traj = match config.front {
        FrontKind::Constant => {
            BoundaryTrajectory::constant(params.b, params.m, params.horizon, steps)?
        }
        FrontKind::Linear { rate } => {
            BoundaryTrajectory::linear(params.b, rate, params.m, params.horizon, steps)?
        }
    };
    let field = solve_mbp(&params, &traj, &u0)?;
    let integral_residual = integral_condition_residual(&field, &u0);

    let mut report = RunReport {
        config_echo: crate::config::echo(config),
        ..RunReport::default()
    };
    field_flags(&field, &mut report.flags);
    let max_r = integral_residual
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    report.notes.push(format!(
        "max integral-condition residual (non-solution detector for prescribed fronts): {max_r:.6e}"
    ));

    write_text(out, "front.csv", &render_front_csv(&field, &integral_residual))?;
    write_text(
        out,
        "field.csv",
        &render_field_csv(&field, config.field_time_stride, config.field_node_stride),
    )?;
    Ok(report)
}

fn run_convergence(config: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    let mut report = RunReport {
        config_echo: crate::config::echo(config),
        ..RunReport::default()
    };
    let mut csv = String::from("level,n,dt,max_integral_residual\n");
    let mut residuals = Vec::new();
    for level in 0..2usize {
        let factor = 1usize << level;
        let n = (config.n - 1) * factor + 1;
        let dt = config.dt / factor as f64;
        let cfg = RunConfig {
            n,
            dt,
            ..config.clone()
        };
        let params = stefan_params(&cfg)?;
        let u0 = initial_data(&cfg, &params)?;
        let sol = solve_stefan(&params, &u0, &fixed_point_options(&cfg))?;
        let max_r = sol
            .integral_residual
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let _ = writeln!(csv, "{level},{n},{},{}", fmt_float(dt), fmt_float(max_r));
        residuals.push(max_r);
    }
    let ratio = residuals[0] / residuals[1].max(1e-300);
    report.flags.push(Flag::new(
        "integral-residual-refinement",
        1.8 - ratio,
        0.0,
    ));
    report
        .notes
        .push(format!("residual ratio coarse/fine: {ratio:.3}"));
    write_text(out, "convergence.csv", &csv)?;
    Ok(report)
}

fn run_monotonicity(config: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    let params = stefan_params(config)?;
    let opts = fixed_point_options(config);
    let thetas = config.thetas.clone();

    // Fan the runs over a worker pool; results land in theta order.
    let workers = sweep_workers(thetas.len());
    let results: Mutex<Vec<Option<Result<StefanSolution, CliError>>>> =
        Mutex::new((0..thetas.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= thetas.len() {
                    break;
                }
                let run = scaled_cap(&params, thetas[idx])
                    .and_then(|u0| Ok(solve_stefan(&params, &u0, &opts)?));
                results.lock().expect("poisoned sweep results").as_mut_slice()[idx] = Some(run);
            });
        }
    });
    let runs: Vec<StefanSolution> = results
        .into_inner()
        .expect("poisoned sweep results")
        .into_iter()
        .map(|r| r.expect("worker covered every index"))
        .collect::<Result<_, _>>()?;

    let mut report = RunReport {
        config_echo: crate::config::echo(config),
        ..RunReport::default()
    };
    let alpha = config.alpha;
    let (b, m, horizon) = (config.b, config.m, config.horizon);
    let mut csv = String::from("theta_lo,theta_hi,data_gap,gronwall_tolerance,max_front_gap\n");
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let (lo, hi) = if thetas[i] <= thetas[j] { (i, j) } else { (j, i) };
            let delta = runs[hi].field.v[0]
                .values()
                .iter()
                .zip(runs[lo].field.v[0].values())
                .map(|(a, c)| a - c)
                .fold(0.0f64, f64::max);
            let n_const =
                delta * (1.0 + b / 2.0 + delta / (2.0 * b) + delta / 2.0 + delta * delta / (8.0 * b));
            let h_const = m * (b + delta + m * horizon).powf(alpha)
                / (b * gamma(1.0 + alpha)? * gamma(2.0 - alpha)?);
            let tol = gronwall_bound(1.0, 1.0 - alpha, |_| n_const, |_| h_const, horizon)?
                .value_at(horizon);
            let rep = monotone_dependence_check(&runs[lo], &runs[hi], tol)?;
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                fmt_float(thetas[lo]),
                fmt_float(thetas[hi]),
                fmt_float(delta),
                fmt_float(tol),
                fmt_float(rep.max_gap),
            );
            report.flags.push(Flag::new(
                format!("monotone-theta-{}-vs-{}", thetas[lo], thetas[hi]),
                rep.max_gap,
                tol,
            ));
        }
    }
    write_text(out, "monotonicity.csv", &csv)?;
    for (theta, run) in thetas.iter().zip(&runs) {
        write_text(
            out,
            &format!("front_theta_{theta}.csv"),
            &render_front_csv(&run.field, &run.integral_residual),
        )?;
    }
    Ok(report)
}

fn run_opcheck(config: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    use fracstef_core::grid::Grid;
    let mut report = RunReport {
        config_echo: crate::config::echo(config),
        ..RunReport::default()
    };
    let mut csv = String::from("alpha,beta,n,err_integral,err_caputo\n");
    for &alpha in &config.alphas {
        let order = FracOrder::new(alpha)?;
        for beta in [1.0f64, 2.0, 3.0] {
            let int_ratio = gamma(beta + 1.0)? / gamma(alpha + beta + 1.0)?;
            let cap_ratio = gamma(beta + 1.0)? / gamma(beta - alpha + 1.0)?;
            let mut e_int = Vec::new();
            let mut e_cap = Vec::new();
            for &n in &config.ns {
                let g = Grid::new(n)?;
                let f = GridFunction::sample(g, |x| x.powf(beta))?;
                let ei = g
                    .nodes()
                    .zip(frac_integral(&f, order).values())
                    .map(|(x, v)| (v - int_ratio * x.powf(alpha + beta)).abs())
                    .fold(0.0f64, f64::max);
                let ec = g
                    .nodes()
                    .zip(caputo(&f, order).values())
                    .map(|(x, v)| (v - cap_ratio * x.powf(beta - alpha)).abs())
                    .fold(0.0f64, f64::max);
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    fmt_float(alpha),
                    fmt_float(beta),
                    n,
                    fmt_float(ei),
                    fmt_float(ec)
                );
                e_int.push(ei);
                e_cap.push(ec);
            }
            let exact = 1e-12;
            let p_int = order_of(&e_int);
            let p_cap = order_of(&e_cap);
            if *e_int.last().expect("levels nonempty") > exact {
                report.flags.push(Flag::new(
                    format!("integral-order-a{alpha}-b{beta}"),
                    1.5 - p_int,
                    0.0,
                ));
            }
            if *e_cap.last().expect("levels nonempty") > exact {
                report.flags.push(Flag::new(
                    format!("caputo-order-a{alpha}-b{beta}"),
                    (2.0 - alpha - 0.1) - p_cap,
                    0.0,
                ));
            }
            report.notes.push(format!(
                "alpha={alpha} beta={beta}: integral order {p_int:.2}, caputo order {p_cap:.2}"
            ));
        }
    }
    write_text(out, "opcheck.csv", &csv)?;
    Ok(report)
}

fn order_of(errors: &[f64]) -> f64 {
    if errors.len() < 2 {
        return f64::NAN;
    }
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .enumerate()
        .map(|(k, e)| (k as f64, -e.max(1e-300).log2()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Worker count for sweep modes: capped by FRACSTEF_THREADS when set.
fn sweep_workers(jobs: usize) -> usize {
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let cap = std::env::var("FRACSTEF_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|v| *v >= 1)
        .unwrap_or(hw);
    cap.min(jobs).max(1)
}

/// Execute the configured mode, writing artifacts under the output
/// directory, and return the report (also written as report.txt).
pub fn run(config: &RunConfig) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let out = Path::new(&config.out_dir).to_path_buf();
    let mut report = match config.mode {
        Mode::SolveStefan => run_solve_stefan(config, &out)?,
        Mode::SolveMbp => run_solve_mbp(config, &out)?,
        Mode::Convergence => run_convergence(config, &out)?,
        Mode::Monotonicity => run_monotonicity(config, &out)?,
        Mode::Opcheck => run_opcheck(config, &out)?,
    };
    report.elapsed_secs = start.elapsed().as_secs_f64();
    write_text(&out, "report.txt", &report.render())?;
    Ok(report)
}
