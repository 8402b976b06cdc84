//! CSV ingestion and prediction output.
//!
//! Data CSV contract: UTF-8, comma separator, decimal point, **header row
//! required**. For training data every column but the last is a feature and
//! the last column is the target. For prediction the column count decides:
//! a file whose width equals the model's input dimension `d` is all
//! features, a file of width `d + 1` has its last column (a target, as in a
//! training file) ignored.
//!
//! Predictions are written as a one-column CSV (`prediction` header) with 17
//! significant digits, so values survive a write/parse round trip bit-exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use mape_core::Dataset64;
use ndarray::Array2;

use crate::error::CliError;

/// A raw numeric table read from CSV: header names plus row-major values.
pub struct NumericTable {
    /// Column names from the header row.
    pub headers: Vec<String>,
    /// Values, one `Vec` per row; all rows have `headers.len()` entries.
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    /// Number of columns.
    pub fn width(&self) -> usize {
        self.headers.len()
    }

    /// The first `cols` columns as a dense matrix.
    pub fn matrix(&self, cols: usize) -> Array2<f64> {
        let mut m = Array2::zeros((self.rows.len(), cols));
        for (i, row) in self.rows.iter().enumerate() {
            for j in 0..cols {
                m[(i, j)] = row[j];
            }
        }
        m
    }
}

/// Read a CSV file into a numeric table, validating shape and numbers.
/// Errors name the file, the 1-based line and the offending column.
pub fn read_numeric_table(path: &Path) -> Result<NumericTable, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Input(format!("cannot open data file {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        // Ragged rows are reported by the width check below, which names
        // the line and both field counts.
        .flexible(true)
        .from_reader(file);

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Input(format!("data file {}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let width = headers.len();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| CliError::Input(format!("data file {}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(CliError::Input(format!(
                "data file {}: line {line}: expected {width} fields, got {}",
                path.display(),
                record.len()
            )));
        }
        let mut row = Vec::with_capacity(width);
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                CliError::Input(format!(
                    "data file {}: line {line}, column {} (`{}`): cannot parse `{field}` as a number",
                    path.display(),
                    col + 1,
                    headers[col]
                ))
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!(
            "data file {}: no data rows after the header",
            path.display()
        )));
    }
    Ok(NumericTable { headers, rows })
}

/// Read a training CSV (features…, target) into a dataset.
pub fn read_dataset(path: &Path) -> Result<Dataset64, CliError> {
    let table = read_numeric_table(path)?;
    if table.width() < 2 {
        return Err(CliError::Input(format!(
            "data file {}: need at least 2 columns (features…, target), got {}",
            path.display(),
            table.width()
        )));
    }
    let d = table.width() - 1;
    let x = table.matrix(d);
    let y: Vec<f64> = table.rows.iter().map(|row| row[d]).collect();
    Ok(Dataset64::new(x, y)?)
}

/// Extract the feature matrix for a `d`-input model from a table of width
/// `d` (all features) or `d + 1` (last column ignored as a target).
pub fn feature_matrix(
    table: &NumericTable,
    d: usize,
    path: &Path,
) -> Result<Array2<f64>, CliError> {
    if table.width() == d || table.width() == d + 1 {
        Ok(table.matrix(d))
    } else {
        Err(CliError::Input(format!(
            "data file {}: the model takes {d} feature(s), so the CSV must have {d} columns \
             (features only) or {} (features plus a trailing target), got {}",
            path.display(),
            d + 1,
            table.width()
        )))
    }
}

/// Write predictions as a one-column CSV with 17 significant digits.
pub fn write_predictions(path: &Path, predictions: &[f64]) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    let io_err = |e: std::io::Error| CliError::Runtime(format!("writing {}: {e}", path.display()));
    writeln!(w, "prediction").map_err(io_err)?;
    for p in predictions {
        writeln!(w, "{p:.16e}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Validate that `dir` can be written to by creating and removing a probe
/// file. Called before long computations so a bad output location fails
/// fast; failures are input errors (the location came from the user).
pub fn ensure_writable_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| {
        CliError::Input(format!(
            "cannot create output directory {}: {e}",
            dir.display()
        ))
    })?;
    let probe = dir.join(format!(".write_probe_{}", std::process::id()));
    std::fs::write(&probe, b"probe").map_err(|e| {
        CliError::Input(format!(
            "output directory {} is not writable: {e}",
            dir.display()
        ))
    })?;
    std::fs::remove_file(&probe).map_err(|e| {
        CliError::Input(format!(
            "output directory {} is not writable: {e}",
            dir.display()
        ))
    })
}

/// Validate the directory that will hold output file `path` (its parent).
pub fn ensure_writable_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        // A bare file name has parent "" — the current directory.
        Some(p) if p.as_os_str().is_empty() => ensure_writable_dir(Path::new(".")),
        Some(p) => ensure_writable_dir(p),
        None => Err(CliError::Input(format!(
            "output path {} has no parent directory",
            path.display()
        ))),
    }
}
