//! Flat key-value run configuration.
//!
//! Format: one `key = value` pair per line, `#` starts a comment, blank
//! lines ignored. Keys are validated against the mode; unknown or duplicate
//! keys are errors so typos cannot silently fall back to defaults.

use crate::CliError;
use std::collections::BTreeMap;

/// Execution mode, selected on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    SolveStefan,
    SolveMbp,
    Convergence,
    Monotonicity,
    Opcheck,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "solve-stefan" => Ok(Mode::SolveStefan),
            "solve-mbp" => Ok(Mode::SolveMbp),
            "convergence" => Ok(Mode::Convergence),
            "monotonicity" => Ok(Mode::Monotonicity),
            "opcheck" => Ok(Mode::Opcheck),
            other => Err(CliError::Validation(format!(
                "unknown mode '{other}' (expected solve-stefan | solve-mbp | convergence | monotonicity | opcheck)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::SolveStefan => "solve-stefan",
            Mode::SolveMbp => "solve-mbp",
            Mode::Convergence => "convergence",
            Mode::Monotonicity => "monotonicity",
            Mode::Opcheck => "opcheck",
        }
    }
}

/// Initial-data selector.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    Zero,
    /// Scaled admissible cap `θ · m/(2Γ(1+α)) (b^α - x^α)`, `θ ∈ (0, 1]`.
    ScaledCap { theta: f64 },
    /// Samples read from a file, one value per reference node.
    Custom { path: String },
}

/// Prescribed-front selector for the solve-mbp mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FrontKind {
    Constant,
    Linear { rate: f64 },
}

/// A parsed and validated run configuration with defaults filled in.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub alpha: f64,
    pub b: f64,
    pub m: f64,
    pub horizon: f64,
    pub n: usize,
    pub dt: f64,
    pub initial: InitialData,
    pub front: FrontKind,
    pub fp_tol: f64,
    pub fp_max_iters: usize,
    pub out_dir: String,
    /// Theta sweep for monotonicity mode.
    pub thetas: Vec<f64>,
    /// Orders and resolutions for opcheck mode.
    pub alphas: Vec<f64>,
    pub ns: Vec<usize>,
    /// Subsampling strides for field.csv.
    pub field_time_stride: usize,
    pub field_node_stride: usize,
}

/// Key-value pairs with their line numbers, in file order.
pub type RawConfig = Vec<(usize, String, String)>;

/// Tokenize the flat key-value format. Never panics on malformed input.
pub fn parse_config_str(text: &str) -> Result<RawConfig, CliError> {
    let mut out = RawConfig::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(CliError::Parse {
                line: line_no,
                message: format!("expected 'key = value', got '{line}'"),
            });
        };
        let key = line[..eq].trim();
        let value = line[eq + 1..].trim();
        if key.is_empty() {
            return Err(CliError::Parse {
                line: line_no,
                message: "empty key".into(),
            });
        }
        if value.is_empty() {
            return Err(CliError::Parse {
                line: line_no,
                message: format!("empty value for key '{key}'"),
            });
        }
        if out.iter().any(|(_, k, _)| k == key) {
            return Err(CliError::Parse {
                line: line_no,
                message: format!("duplicate key '{key}'"),
            });
        }
        out.push((line_no, key.to_string(), value.to_string()));
    }
    Ok(out)
}

struct Fields {
    map: BTreeMap<String, (usize, String)>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<f64>().map(Some).map_err(|_| CliError::Parse {
                line,
                message: format!("field '{key}': expected a number, got '{v}'"),
            }),
        }
    }

    fn usize(&mut self, key: &str) -> Result<Option<usize>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<usize>().map(Some).map_err(|_| CliError::Parse {
                line,
                message: format!("field '{key}': expected a nonnegative integer, got '{v}'"),
            }),
        }
    }

    fn f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|tok| tok.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map(Some)
                .map_err(|_| CliError::Parse {
                    line,
                    message: format!("field '{key}': expected comma-separated numbers, got '{v}'"),
                }),
        }
    }

    fn usize_list(&mut self, key: &str) -> Result<Option<Vec<usize>>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|tok| tok.trim().parse::<usize>())
                .collect::<Result<Vec<usize>, _>>()
                .map(Some)
                .map_err(|_| CliError::Parse {
                    line,
                    message: format!("field '{key}': expected comma-separated integers, got '{v}'"),
                }),
        }
    }
}

/// Validate raw pairs into a [`RunConfig`] for the given mode, applying the
/// documented defaults. Every error names the offending field.
pub fn resolve_config(mode: Mode, raw: RawConfig) -> Result<RunConfig, CliError> {
    let mut fields = Fields {
        map: raw
            .into_iter()
            .map(|(line, k, v)| (k, (line, v)))
            .collect(),
    };

    let alpha = fields
        .f64("alpha")?
        .ok_or_else(|| CliError::Validation("missing required field 'alpha'".into()))?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Validation(format!(
            "alpha out of (0,1): {alpha}"
        )));
    }
    let b = fields.f64("b")?.unwrap_or(1.0);
    let m = fields.f64("m")?.unwrap_or(1.0);
    let horizon = fields.f64("t")?.unwrap_or(0.5);
    for (name, v) in [("b", b), ("m", m), ("t", horizon)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Validation(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    let n = fields.usize("n")?.unwrap_or(129);
    if n < 5 {
        return Err(CliError::Validation(format!("n must be at least 5, got {n}")));
    }
    let dt = fields.f64("dt")?.unwrap_or(horizon / 128.0);
    if !(dt > 0.0 && dt <= horizon) {
        return Err(CliError::Validation(format!(
            "dt must lie in (0, t], got {dt}"
        )));
    }

    let theta = fields.f64("theta")?.unwrap_or(1.0);
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(CliError::Validation(format!("theta out of (0,1]: {theta}")));
    }
    let u0_file = fields.take("u0_file").map(|(_, v)| v);
    let initial = match fields.take("u0") {
        None => InitialData::ScaledCap { theta },
        Some((_, v)) => match v.as_str() {
            "zero" => InitialData::Zero,
            "scaled-cap" => InitialData::ScaledCap { theta },
            "custom" => InitialData::Custom {
                path: u0_file.clone().ok_or_else(|| {
                    CliError::Validation("u0 = custom requires 'u0_file'".into())
                })?,
            },
            other => {
                return Err(CliError::Validation(format!(
                    "u0 must be zero | scaled-cap | custom, got '{other}'"
                )))
            }
        },
    };

    let front_rate = fields.f64("front_rate")?.unwrap_or(m / 2.0);
    if !(0.0..=m).contains(&front_rate) {
        return Err(CliError::Validation(format!(
            "front_rate out of [0, m]: {front_rate}"
        )));
    }
    let front = match fields.take("front") {
        None => FrontKind::Linear { rate: front_rate },
        Some((_, v)) => match v.as_str() {
            "constant" => FrontKind::Constant,
            "linear" => FrontKind::Linear { rate: front_rate },
            other => {
                return Err(CliError::Validation(format!(
                    "front must be constant | linear, got '{other}'"
                )))
            }
        },
    };

    let fp_tol = fields.f64("fp_tol")?.unwrap_or(1e-8);
    if fp_tol.is_nan() || fp_tol <= 0.0 {
        return Err(CliError::Validation(format!(
            "fp_tol must be positive, got {fp_tol}"
        )));
    }
    let fp_max_iters = fields.usize("fp_max_iters")?.unwrap_or(50);
    if fp_max_iters == 0 {
        return Err(CliError::Validation("fp_max_iters must be positive".into()));
    }

    let out_dir = fields
        .take("out")
        .map(|(_, v)| v)
        .unwrap_or_else(|| "out".to_string());

    let thetas = fields
        .f64_list("thetas")?
        .unwrap_or_else(|| vec![0.25, 0.5, 1.0]);
    if thetas.is_empty() || thetas.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
        return Err(CliError::Validation(
            "thetas must be a nonempty list inside (0,1]".into(),
        ));
    }
    let alphas = fields
        .f64_list("alphas")?
        .unwrap_or_else(|| vec![0.6, 0.75, 0.9]);
    if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(CliError::Validation(
            "alphas must be a nonempty list inside (0,1)".into(),
        ));
    }
    let ns = fields
        .usize_list("ns")?
        .unwrap_or_else(|| vec![65, 129, 257, 513]);
    if ns.is_empty() || ns.iter().any(|n| *n < 5) {
        return Err(CliError::Validation(
            "ns must be a nonempty list of grid sizes >= 5".into(),
        ));
    }

    let steps = (horizon / dt).round().max(1.0) as usize;
    let field_time_stride = fields
        .usize("field_time_stride")?
        .unwrap_or_else(|| (steps / 32).max(1));
    let field_node_stride = fields
        .usize("field_node_stride")?
        .unwrap_or_else(|| (n / 64).max(1));
    if field_time_stride == 0 || field_node_stride == 0 {
        return Err(CliError::Validation("field strides must be positive".into()));
    }

    if let Some((line, key_value)) = fields
        .map
        .iter()
        .map(|(k, (line, _))| (*line, k.clone()))
        .next()
    {
        return Err(CliError::Parse {
            line,
            message: format!("unknown field '{key_value}'"),
        });
    }

    Ok(RunConfig {
        mode,
        alpha,
        b,
        m,
        horizon,
        n,
        dt,
        initial,
        front,
        fp_tol,
        fp_max_iters,
        out_dir,
        thetas,
        alphas,
        ns,
        field_time_stride,
        field_node_stride,
    })
}

/// Deterministic echo of the resolved configuration for the report.
pub fn echo(config: &RunConfig) -> String {
    let mut s = String::new();
    s.push_str(&format!("mode = {}\n", config.mode.name()));
    s.push_str(&format!("alpha = {}\n", config.alpha));
    s.push_str(&format!("b = {}\n", config.b));
    s.push_str(&format!("m = {}\n", config.m));
    s.push_str(&format!("t = {}\n", config.horizon));
    s.push_str(&format!("n = {}\n", config.n));
    s.push_str(&format!("dt = {}\n", config.dt));
    match &config.initial {
        InitialData::Zero => s.push_str("u0 = zero\n"),
        InitialData::ScaledCap { theta } => {
            s.push_str(&format!("u0 = scaled-cap (theta = {theta})\n"))
        }
        InitialData::Custom { path } => s.push_str(&format!("u0 = custom ({path})\n")),
    }
    match config.front {
        FrontKind::Constant => s.push_str("front = constant\n"),
        FrontKind::Linear { rate } => s.push_str(&format!("front = linear (rate = {rate})\n")),
    }
    s.push_str(&format!("fp_tol = {}\n", config.fp_tol));
    s.push_str(&format!("fp_max_iters = {}\n", config.fp_max_iters));
    s.push_str(&format!("out = {}\n", config.out_dir));
    match config.mode {
        Mode::Monotonicity => s.push_str(&format!("thetas = {:?}\n", config.thetas)),
        Mode::Opcheck => {
            s.push_str(&format!("alphas = {:?}\n", config.alphas));
            s.push_str(&format!("ns = {:?}\n", config.ns));
        }
        _ => {}
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let raw = parse_config_str("alpha = 0.75\n").unwrap();
        let cfg = resolve_config(Mode::SolveStefan, raw).unwrap();
        assert_eq!(cfg.b, 1.0);
        assert_eq!(cfg.m, 1.0);
        assert_eq!(cfg.horizon, 0.5);
        assert_eq!(cfg.n, 129);
        assert_eq!(cfg.fp_max_iters, 50);
        assert!(matches!(cfg.initial, InitialData::ScaledCap { theta } if theta == 1.0));
    }

    #[test]
    fn missing_alpha_is_a_validation_error() {
        let raw = parse_config_str("b = 2.0\n").unwrap();
        let err = resolve_config(Mode::SolveStefan, raw).unwrap_err();
        assert!(err.to_string().contains("alpha"));
    }

    #[test]
    fn theta_out_of_range_names_the_field() {
        let raw = parse_config_str("alpha = 0.75\ntheta = 1.5\n").unwrap();
        let err = resolve_config(Mode::SolveStefan, raw).unwrap_err();
        assert!(err.to_string().contains("theta out of (0,1]"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_config_str("alpha = 0.75\nnot a pair\n").unwrap_err();
        match err {
            CliError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let raw = parse_config_str("# comment\n\nalpha = 0.6 # trailing\n").unwrap();
        assert_eq!(raw.len(), 1);
        assert_eq!(raw[0].1, "alpha");
        assert_eq!(raw[0].2, "0.6");
    }

    #[test]
    fn duplicate_and_unknown_keys_rejected() {
        assert!(parse_config_str("alpha = 0.5\nalpha = 0.6\n").is_err());
        let raw = parse_config_str("alpha = 0.5\nbogus = 1\n").unwrap();
        let err = resolve_config(Mode::SolveStefan, raw).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn custom_initial_data_requires_file() {
        let raw = parse_config_str("alpha = 0.5\nu0 = custom\n").unwrap();
        assert!(resolve_config(Mode::SolveStefan, raw).is_err());
    }
}
