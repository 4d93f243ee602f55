use fracstef_cli::config::{parse_config_str, resolve_config, Mode};
use fracstef_cli::run::run;
use fracstef_cli::CliError;
use std::process::ExitCode;

const USAGE: &str = "\
usage: fracstef <mode> --config <path> [--out <dir>]

modes:
  solve-stefan   free-boundary solve by front fixed-point iteration
  solve-mbp      moving-boundary solve with a prescribed front
  convergence    integral-residual refinement study (h and dt halved)
  monotonicity   ordered-data front comparison sweep over theta values
  opcheck        fractional-operator power-rule refinement table

exit codes: 0 all invariant flags pass, 1 flag failure or i/o error,
            2 validation/parse error, 3 solver non-convergence.

The config file is flat `key = value` text with `#` comments; see the
project README for the key reference. FRACSTEF_THREADS caps sweep
parallelism.";

fn main() -> ExitCode {
    match try_main() {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("fracstef: one or more invariant flags failed (see report.txt)");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("fracstef: error [{}]: {e}", e.class());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn try_main() -> Result<bool, CliError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--help" || a == "-h") || args.is_empty() {
        println!("{USAGE}");
        return Ok(true);
    }

    let mode = Mode::parse(&args[0])?;
    let mut config_path: Option<String> = None;
    let mut out_override: Option<String> = None;
    let mut i = 1;
    while i < args.len() {
        match args[i].as_str() {
            "--config" => {
                i += 1;
                config_path = Some(args.get(i).cloned().ok_or_else(|| {
                    CliError::Validation("--config requires a path".into())
                })?);
            }
            "--out" => {
                i += 1;
                out_override = Some(args.get(i).cloned().ok_or_else(|| {
                    CliError::Validation("--out requires a directory".into())
                })?);
            }
            other => {
                return Err(CliError::Validation(format!("unknown argument '{other}'")));
            }
        }
        i += 1;
    }
    let config_path =
        config_path.ok_or_else(|| CliError::Validation("missing --config <path>".into()))?;

    let text = std::fs::read_to_string(&config_path)?;
    let raw = parse_config_str(&text)?;
    let mut config = resolve_config(mode, raw)?;
    if let Some(dir) = out_override {
        config.out_dir = dir;
    }

    let report = run(&config)?;
    print!("{}", report.render());
    Ok(report.all_pass())
}
