//! File formats: JSON measure files, CSV tables and atomic writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use pfo_core::{DMatrix, DVector, EmpiricalMeasure, GaussianMeasure};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianRecord {
    pub dim: usize,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalRecord {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotFile<T> {
    pub snapshots: Vec<T>,
}

/// A single measure read from disk.
#[derive(Debug, Clone)]
pub enum Measure {
    Gaussian(GaussianMeasure),
    Empirical(EmpiricalMeasure),
}

impl Measure {
    pub fn dim(&self) -> usize {
        match self {
            Measure::Gaussian(g) => g.dim(),
            Measure::Empirical(e) => e.dim(),
        }
    }
}

impl From<&GaussianMeasure> for GaussianRecord {
    fn from(g: &GaussianMeasure) -> Self {
        Self {
            dim: g.dim(),
            mean: g.mean().iter().copied().collect(),
            cov: g.cov().row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }
}

impl From<&EmpiricalMeasure> for EmpiricalRecord {
    fn from(e: &EmpiricalMeasure) -> Self {
        Self {
            dim: e.dim(),
            points: e.points().iter().map(|p| p.iter().copied().collect()).collect(),
            weights: e.weights().to_vec(),
        }
    }
}

impl GaussianRecord {
    fn into_measure(self, what: &str) -> Result<GaussianMeasure, CliError> {
        if self.mean.len() != self.dim {
            return Err(CliError::Usage(format!("{what}: mean has {} entries, dim is {}", self.mean.len(), self.dim)));
        }
        let cov = matrix_from_rows(&self.cov, what)?;
        if cov.shape() != (self.dim, self.dim) {
            return Err(CliError::Usage(format!("{what}: covariance must be {0}x{0}", self.dim)));
        }
        GaussianMeasure::new(DVector::from_vec(self.mean), cov).map_err(|e| CliError::Usage(format!("{what}: {e}")))
    }
}

impl EmpiricalRecord {
    fn into_measure(self, what: &str) -> Result<EmpiricalMeasure, CliError> {
        if let Some(k) = self.points.iter().position(|p| p.len() != self.dim) {
            return Err(CliError::Usage(format!("{what}: point {k} does not have dimension {}", self.dim)));
        }
        let points = self.points.into_iter().map(DVector::from_vec).collect();
        EmpiricalMeasure::new(points, self.weights).map_err(|e| CliError::Usage(format!("{what}: {e}")))
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn parse_typed<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::parse(path, &e))
}

/// Reads a single-measure file; the schema is recognised by its keys.
pub fn read_measure(path: &Path) -> Result<Measure, CliError> {
    let text = read_text(path)?;
    let value: serde_json::Value = parse_typed(path, &text)?;
    let what = path.display().to_string();
    if value.get("cov").is_some() {
        Ok(Measure::Gaussian(parse_typed::<GaussianRecord>(path, &text)?.into_measure(&what)?))
    } else if value.get("points").is_some() {
        Ok(Measure::Empirical(parse_typed::<EmpiricalRecord>(path, &text)?.into_measure(&what)?))
    } else {
        Err(CliError::Usage(format!(
            "{what}: expected a Gaussian (dim, mean, cov) or empirical (dim, points, weights) measure"
        )))
    }
}

pub fn read_gaussian_snapshots(path: &Path) -> Result<Vec<GaussianMeasure>, CliError> {
    let text = read_text(path)?;
    let file: SnapshotFile<GaussianRecord> = parse_typed(path, &text)?;
    collect_snapshots(path, file.snapshots, GaussianRecord::into_measure)
}

pub fn read_empirical_snapshots(path: &Path) -> Result<Vec<EmpiricalMeasure>, CliError> {
    let text = read_text(path)?;
    let file: SnapshotFile<EmpiricalRecord> = parse_typed(path, &text)?;
    collect_snapshots(path, file.snapshots, EmpiricalRecord::into_measure)
}

fn collect_snapshots<R, M>(path: &Path, records: Vec<R>, convert: fn(R, &str) -> Result<M, CliError>) -> Result<Vec<M>, CliError> {
    if records.len() < 2 {
        return Err(CliError::Usage(format!("{}: at least two snapshots are required", path.display())));
    }
    records
        .into_iter()
        .enumerate()
        .map(|(k, r)| convert(r, &format!("{}: snapshot {k}", path.display())))
        .collect()
}

pub fn gaussian_snapshots_json(snapshots: &[GaussianMeasure]) -> String {
    let file = SnapshotFile {
        snapshots: snapshots.iter().map(GaussianRecord::from).collect::<Vec<_>>(),
    };
    serde_json::to_string_pretty(&file).expect("snapshots serialize")
}

pub fn empirical_snapshots_json(snapshots: &[EmpiricalMeasure]) -> String {
    let file = SnapshotFile {
        snapshots: snapshots.iter().map(EmpiricalRecord::from).collect::<Vec<_>>(),
    };
    serde_json::to_string_pretty(&file).expect("snapshots serialize")
}

pub fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, CliError> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(CliError::Usage(format!("{what}: expected a non-empty rectangular matrix")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Shortest representation that parses back to the same value.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Plain decimal with `digits` significant digits.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.*}", digits.saturating_sub(1), x);
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit, e.g. 9.99.. -> 10.0..
    let sig = s.trim_start_matches('-').chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
    if sig > digits && decimals > 0 {
        format!("{x:.*}", decimals - 1)
    } else {
        s
    }
}

/// Renders a CSV table with an optional header row.
pub fn csv_bytes<I>(header: Option<&[String]>, rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    if let Some(h) = header {
        w.write_record(h).expect("in-memory write");
    }
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Dense matrix as header-less CSV, one matrix row per line.
pub fn matrix_csv(m: &DMatrix<f64>) -> Vec<u8> {
    csv_bytes(None, m.row_iter().map(|r| r.iter().map(|&x| num(x)).collect()))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(significant(1.5409828394149154, 12), "1.54098283941");
        assert_eq!(significant(0.0, 12), "0.00000000000");
        assert_eq!(significant(123456.789, 12), "123456.789000");
        assert_eq!(significant(0.000123, 12), "0.000123000000000");
        assert_eq!(significant(9.9999999999999, 12), "10.0000000000");
        assert_eq!(significant(-2.5, 3), "-2.50");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1e-13, -3.25, 1.0 / 3.0, 6.02e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn matrix_rows_must_be_rectangular() {
        assert!(matrix_from_rows(&[vec![1.0, 2.0], vec![3.0]], "m").is_err());
        assert!(matrix_from_rows(&[], "m").is_err());
        let m = matrix_from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]], "m").unwrap();
        assert_eq!(m[(0, 1)], 2.0);
    }
}
