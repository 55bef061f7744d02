//! File formats: headerless CSV matrices, spectral-measure JSON, plain-text series.

use std::fs;
use std::path::Path;

use covmetric::nalgebra::DMatrix;
use covmetric::symmat::relative_asymmetry;
use covmetric::{SpectralMeasure, SymMatrix};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Relative asymmetry above which an input matrix is rejected.
pub const SYMMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

fn read_bytes(path: &Path) -> Result<(Vec<u8>, InputDigest)> {
    let bytes = fs::read(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let digest = InputDigest { path: path.display().to_string(), sha256: format!("{:x}", Sha256::digest(&bytes)) };
    Ok((bytes, digest))
}

fn parse_number(field: &str, path: &Path) -> Result<f64> {
    let v: f64 =
        field.trim().parse().map_err(|_| CliError::input(format!("{}: '{field}' is not a number", path.display())))?;
    if !v.is_finite() {
        return Err(CliError::input(format!("{}: non-finite entry '{field}'", path.display())));
    }
    Ok(v)
}

/// Parses a square symmetric matrix from headerless CSV text.
pub fn parse_matrix(text: &[u8], path: &Path) -> Result<SymMatrix> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        rows.push(record.iter().map(|f| parse_number(f, path)).collect::<Result<Vec<f64>>>()?);
    }
    rows_to_sym(rows, path)
}

fn rows_to_sym(rows: Vec<Vec<f64>>, path: &Path) -> Result<SymMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(CliError::input(format!("{}: empty matrix", path.display())));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(CliError::input(format!(
            "{}: row {} has {} entries, expected {n} for a square matrix",
            path.display(),
            i + 1,
            r.len()
        )));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let dense = DMatrix::from_row_slice(n, n, &flat);
    let asym = relative_asymmetry(&dense);
    if asym > SYMMETRY_TOL {
        return Err(CliError::input(format!(
            "{}: matrix is not symmetric (relative asymmetry {asym:.3e})",
            path.display()
        )));
    }
    Ok(SymMatrix::new(dense)?)
}

pub fn read_matrix(path: &Path) -> Result<(SymMatrix, InputDigest)> {
    let (bytes, digest) = read_bytes(path)?;
    Ok((parse_matrix(&bytes, path)?, digest))
}

pub fn read_measure(path: &Path) -> Result<(SpectralMeasure, InputDigest)> {
    let (bytes, digest) = read_bytes(path)?;
    let measure = serde_json::from_slice(&bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok((measure, digest))
}

/// Reads numbers separated by commas, whitespace or newlines.
pub fn read_series(path: &Path) -> Result<(Vec<f64>, InputDigest)> {
    let (bytes, digest) = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|_| CliError::input(format!("{}: not valid UTF-8", path.display())))?;
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .map(|f| parse_number(f, path))
        .collect::<Result<Vec<f64>>>()?;
    Ok((values, digest))
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn round_vec(v: &[f64]) -> Vec<f64> {
    v.iter().copied().map(round12).collect()
}

/// Row-major rows rounded to 12 significant digits.
pub fn matrix_rows(m: &SymMatrix) -> Vec<Vec<f64>> {
    m.to_rows().iter().map(|r| round_vec(r)).collect()
}

/// Headerless CSV, entries rounded to 12 significant digits.
pub fn matrix_csv(m: &SymMatrix) -> String {
    let mut out = String::new();
    for row in matrix_rows(m) {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
