//! CSV and report emission. CSVs use a fixed header schema and 17
//! significant digits so identical configs produce byte-identical files.

use crate::CliError;
use fracstef_core::mbp::SolutionField;
use std::fmt::Write as _;
use std::path::Path;

/// 17 significant digits: full f64 round-trip precision.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// One named invariant flag with its measured margin.
#[derive(Clone, Debug)]
pub struct Flag {
    pub name: String,
    pub margin: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Flag {
    pub fn new(name: impl Into<String>, margin: f64, tol: f64) -> Self {
        let name = name.into();
        Flag {
            name,
            margin,
            tol,
            pass: margin <= tol,
        }
    }
}

/// Everything a run reports besides its CSV artifacts.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub config_echo: String,
    pub flags: Vec<Flag>,
    pub residual_history: Vec<f64>,
    pub notes: Vec<String>,
    pub elapsed_secs: f64,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.flags.iter().all(|f| f.pass)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "fracstef run report");
        let _ = writeln!(s);
        let _ = writeln!(s, "[config]");
        s.push_str(&self.config_echo);
        let _ = writeln!(s);
        let _ = writeln!(s, "[invariants]");
        for f in &self.flags {
            let _ = writeln!(
                s,
                "{} {:<28} margin {: >13.6e}  tol {: >13.6e}",
                if f.pass { "PASS" } else { "FAIL" },
                f.name,
                f.margin,
                f.tol
            );
        }
        if !self.residual_history.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(s, "[residual history]");
            for (k, r) in self.residual_history.iter().enumerate() {
                let _ = writeln!(s, "iteration {:>3}: {:.6e}", k + 1, r);
            }
        }
        if !self.notes.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(s, "[notes]");
            for n in &self.notes {
                let _ = writeln!(s, "{n}");
            }
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "[timing]");
        let _ = writeln!(s, "total: {:.3} s", self.elapsed_secs);
        let _ = writeln!(
            s,
            "status: {}",
            if self.all_pass() { "PASS" } else { "FAIL" }
        );
        s
    }
}

pub fn write_text(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)?;
    Ok(())
}

/// front.csv: `t,s,sdot,flux,integral_residual` per sample time.
pub fn render_front_csv(field: &SolutionField, integral_residual: &[f64]) -> String {
    let traj = &field.trajectory;
    let mut s = String::from("t,s,sdot,flux,integral_residual\n");
    for (k, t) in traj.times().iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_float(*t),
            fmt_float(traj.positions()[k]),
            fmt_float(traj.slopes()[k]),
            fmt_float(field.front_flux[k]),
            fmt_float(integral_residual[k]),
        );
    }
    s
}

/// field.csv: `t,x_physical,u` subsampled by the configured strides; the
/// final time and the front-side node are always included.
pub fn render_field_csv(field: &SolutionField, time_stride: usize, node_stride: usize) -> String {
    let traj = &field.trajectory;
    let grid = field.params.grid();
    let n = grid.n();
    let last_k = traj.times().len() - 1;
    let mut node_idx: Vec<usize> = (0..n).step_by(node_stride).collect();
    if *node_idx.last().expect("n >= 3") != n - 1 {
        node_idx.push(n - 1);
    }
    let mut s = String::from("t,x_physical,u\n");
    for (k, t) in traj.times().iter().enumerate() {
        if k % time_stride != 0 && k != last_k {
            continue;
        }
        let front = traj.positions()[k];
        for &i in &node_idx {
            let _ = writeln!(
                s,
                "{},{},{}",
                fmt_float(*t),
                fmt_float(grid.node(i) * front),
                fmt_float(field.value(k, i)),
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_17_significant_digits() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(-0.125), "-1.2500000000000000e-1");
        // Round-trips exactly.
        let v = std::f64::consts::LN_2;
        let s = fmt_float(v);
        assert_eq!(s.parse::<f64>().unwrap(), v);
    }

    #[test]
    fn report_renders_flags() {
        let mut rep = RunReport::default();
        rep.flags.push(Flag::new("demo", 1e-12, 1e-8));
        rep.flags.push(Flag::new("bad", 2.0, 1.0));
        let text = rep.render();
        assert!(text.contains("PASS demo"));
        assert!(text.contains("FAIL bad"));
        assert!(text.contains("status: FAIL"));
        assert!(!rep.all_pass());
    }
}
