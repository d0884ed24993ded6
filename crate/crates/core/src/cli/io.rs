//! Matrix and trajectory files.
//!
//! Matrices are CSV, one row per line, written with 17 significant digits so
//! that every value round-trips exactly. A leading `# rows cols` line is
//! written on output and checked on input when present; other `#` lines and
//! blank lines are skipped.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::CliError;
use crate::integrator::Trajectory;
use crate::matrix::DenseMatrix;

pub fn parse_matrix(text: &str, origin: &str) -> Result<DenseMatrix, CliError> {
    let parse_err = |line: usize, message: String| CliError::Parse {
        origin: origin.to_string(),
        line,
        message,
    };
    let mut header: Option<(usize, usize)> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if header.is_none() && rows.is_empty() {
                let dims: Vec<&str> = comment.split_whitespace().collect();
                if let [r, c] = dims[..] {
                    if let (Ok(r), Ok(c)) = (r.parse(), c.parse()) {
                        header = Some((r, c));
                    }
                }
            }
            continue;
        }
        let row = line
            .split(',')
            .map(|field| {
                let field = field.trim();
                field
                    .parse::<f64>()
                    .map_err(|_| parse_err(line_no, format!("'{field}' is not a number")))
            })
            .collect::<Result<Vec<f64>, CliError>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(
                    line_no,
                    format!("expected {} columns, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no matrix rows".into()));
    }
    let shape = (rows.len(), rows[0].len());
    if let Some(expected) = header {
        if expected != shape {
            return Err(parse_err(
                0,
                format!("header declares {expected:?} but data is {shape:?}"),
            ));
        }
    }
    Ok(DenseMatrix::from_rows(&rows)?)
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_matrix(&text, &path.display().to_string())
}

fn format_value(v: f64) -> String {
    // Normalise -0.0 so that identical matrices give identical bytes.
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

pub fn format_matrix(x: &DenseMatrix) -> String {
    let mut out = format!("# {} {}\n", x.rows(), x.cols());
    for i in 0..x.rows() {
        let line: Vec<String> = x.row(i).iter().map(|v| format_value(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, x: &DenseMatrix) -> Result<(), CliError> {
    fs::write(path, format_matrix(x)).map_err(|e| CliError::io(path, e))
}

/// Writes `t,f,grad_norm,numerical_rank,dist_to_oracle`, one line per sample.
pub fn write_trajectory(
    path: &Path,
    trajectory: &Trajectory,
    oracle: &DenseMatrix,
) -> Result<(), CliError> {
    let mut out = String::from("t,f,grad_norm,numerical_rank,dist_to_oracle\n");
    for s in &trajectory.samples {
        let dist = (&s.x - oracle).norm();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            format_value(s.t),
            format_value(s.f),
            format_value(s.grad_norm),
            s.numerical_rank,
            format_value(dist)
        ));
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

/// One matrix file per recorded sample, `state_000000.csv` onwards.
pub fn dump_states(dir: &Path, trajectory: &Trajectory) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (i, s) in trajectory.samples.iter().enumerate() {
        write_matrix(&dir.join(format!("state_{i:06}.csv")), &s.x)?;
    }
    Ok(())
}

/// Pretty JSON to `path`, or to standard output when `path` is `None`.
pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}
