//! Parser for custom initial-data sample files: one value per line, `#`
//! comments, exactly one value per reference-grid node.

use crate::CliError;

/// Parse sample text into finite values. Never panics on malformed input.
pub fn parse_samples_str(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
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
        let v: f64 = line.parse().map_err(|_| CliError::Parse {
            line: line_no,
            message: format!("expected a number, got '{line}'"),
        })?;
        if !v.is_finite() {
            return Err(CliError::Parse {
                line: line_no,
                message: format!("non-finite sample {v}"),
            });
        }
        out.push(v);
    }
    Ok(out)
}

/// Validate a sample vector against the expected node count.
pub fn check_sample_count(samples: &[f64], n: usize) -> Result<(), CliError> {
    if samples.len() != n {
        return Err(CliError::Validation(format!(
            "u0_file holds {} samples but the grid has {} nodes",
            samples.len(),
            n
        )));
    }
    Ok(())
}
