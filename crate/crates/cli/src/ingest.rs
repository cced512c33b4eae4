//! Reading observations and probability mass functions from text files.

use std::path::Path;

use quadfit_core::Pmf;

use crate::error::{CliError, Result};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse { path: path.to_path_buf(), line, msg: msg.into() }
}

/// Parses `text` into rows of finite numbers. The first non-blank line may
/// be a header; every later line must parse.
fn rows(path: &Path, text: &str, width: usize) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut out = Vec::new();
    let mut first = true;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let was_first = std::mem::replace(&mut first, false);
        let values = match parsed {
            Ok(v) => v,
            Err(_) if was_first => continue,
            Err(_) => return Err(parse_err(path, lineno, format!("cannot parse `{line}` as a number"))),
        };
        if values.len() != width {
            return Err(parse_err(path, lineno, format!("expected {width} field(s), found {}", values.len())));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(parse_err(path, lineno, format!("non-finite value {bad}")));
        }
        out.push((lineno, values));
    }
    if out.is_empty() {
        return Err(CliError::Empty { path: path.to_path_buf() });
    }
    Ok(out)
}

pub fn parse_sample(path: &Path, text: &str) -> Result<Vec<f64>> {
    Ok(rows(path, text, 1)?.into_iter().map(|(_, v)| v[0]).collect())
}

/// One observation per line, with an optional header.
pub fn ingest(path: &Path) -> Result<Vec<f64>> {
    parse_sample(path, &read(path)?)
}

/// `value, weight` per line. Weights are normalized to sum to one.
pub fn parse_pmf(path: &Path, text: &str) -> Result<Pmf> {
    let rows = rows(path, text, 2)?;
    if let Some((line, _)) = rows.iter().find(|(_, v)| v[1] < 0.0) {
        return Err(parse_err(path, *line, "negative probability"));
    }
    let (support, weights) = rows.into_iter().map(|(_, v)| (v[0], v[1])).unzip();
    Ok(Pmf::from_weights(support, weights)?)
}

pub fn ingest_pmf(path: &Path) -> Result<Pmf> {
    parse_pmf(path, &read(path)?)
}
