//! Delimited-text input and output.
//!
//! Composition files are UTF-8, comma-delimited by default, with an optional
//! header row of component names. Numbers are written in Rust's shortest
//! round-trip form, so a written file reads back bit-identically.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::{ContourGrid, StudyReport};
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::geometry::{Composition, UNIT_SUM_TOLERANCE};

/// How to read a composition file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub path: PathBuf,
    pub delimiter: u8,
    pub has_header: bool,
    /// Divide each row by its sum instead of requiring unit sums.
    pub normalize: bool,
}

impl DatasetFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            delimiter: b',',
            has_header: true,
            normalize: false,
        }
    }

    pub fn read(&self) -> Result<DataMatrix> {
        let file = std::fs::File::open(&self.path)
            .map_err(|e| Error::Io(format!("{}: {e}", self.path.display())))?;
        read_compositions(file, self.delimiter, self.has_header, self.normalize)
    }
}

fn csv_error(e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        row,
        column: 0,
        message: e.to_string(),
    }
}

/// Parses compositions from delimited text. Row numbers in errors are
/// 1-based file lines; columns are 1-based.
pub fn read_compositions<R: Read>(reader: R, delimiter: u8, has_header: bool, normalize: bool) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let names: Option<Vec<String>> = if has_header {
        Some(rdr.headers().map_err(csv_error)?.iter().map(str::to_owned).collect())
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut width = names.as_ref().map(Vec::len);
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = idx + 1 + usize::from(has_header);
        if width.is_some_and(|w| w != record.len()) {
            return Err(Error::Parse {
                row: line,
                column: record.len(),
                message: format!("expected {} fields, found {}", width.unwrap_or(0), record.len()),
            });
        }
        width = Some(record.len());
        let mut parts = Vec::with_capacity(record.len());
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row: line,
                column: c + 1,
                message: format!("'{field}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: line,
                    column: c + 1,
                    message: format!("'{field}' is not finite"),
                });
            }
            if v <= 0.0 {
                return Err(Error::Parse {
                    row: line,
                    column: c + 1,
                    message: format!(
                        "component value {v} is not strictly positive; zero and negative parts are \
                         not supported by this model (zero-value handling is out of scope)"
                    ),
                });
            }
            parts.push(v);
        }
        if parts.len() < 2 {
            return Err(Error::Parse {
                row: line,
                column: parts.len(),
                message: "a composition needs at least 2 parts".into(),
            });
        }
        let comp = if normalize {
            Composition::closure(parts)
        } else {
            let sum: f64 = parts.iter().sum();
            if (sum - 1.0).abs() > UNIT_SUM_TOLERANCE {
                return Err(Error::Parse {
                    row: line,
                    column: 0,
                    message: format!("row sums to {sum}, not 1; pass normalize to rescale rows"),
                });
            }
            Composition::new(parts)
        };
        rows.push(comp.map_err(|e| Error::Parse {
            row: line,
            column: 0,
            message: e.to_string(),
        })?);
    }
    let parts = width.unwrap_or(0);
    let data = if rows.is_empty() {
        DataMatrix::empty(parts)?
    } else {
        DataMatrix::from_compositions(rows)?
    };
    match names {
        Some(n) => data.with_component_names(n),
        None => Ok(data),
    }
}

pub fn read_compositions_str(text: &str, normalize: bool) -> Result<DataMatrix> {
    read_compositions(text.as_bytes(), b',', true, normalize)
}

/// Writes a header of component names followed by one row per composition.
pub fn write_compositions<W: Write>(out: W, data: &DataMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(data.component_names()).map_err(io_error)?;
    for row in data.rows() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(io_error)?;
    }
    w.flush()?;
    Ok(())
}

fn io_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Reads a square matrix; a first row that does not parse as numbers is
/// taken to be a header.
pub fn read_matrix<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let parsed: std::result::Result<Vec<f64>, usize> = record
            .iter()
            .enumerate()
            .map(|(c, f)| f.parse::<f64>().map_err(|_| c))
            .collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if idx == 0 => continue,
            Err(c) => {
                return Err(Error::Parse {
                    row: idx + 1,
                    column: c + 1,
                    message: format!("'{}' is not a number", &record[c]),
                })
            }
        }
    }
    let d = rows.len();
    if d == 0 {
        return Err(Error::Parse {
            row: 0,
            column: 0,
            message: "matrix file is empty".into(),
        });
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
        return Err(Error::Parse {
            row: i + 1,
            column: r.len(),
            message: format!("matrix must be square: {d} rows but {} columns", r.len()),
        });
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(DMatrix::from_row_slice(d, d, &flat))
}

pub fn read_matrix_file(path: &Path) -> Result<DMatrix<f64>> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_matrix(file)
}

pub fn write_matrix<W: Write>(out: W, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string())).map_err(io_error)?;
    }
    w.flush()?;
    Ok(())
}

/// `i,j,k,x1,x2,x3,log_density`, with an empty density on the boundary.
pub fn write_contour<W: Write>(out: W, grid: &ContourGrid) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "k", "x1", "x2", "x3", "log_density"]).map_err(io_error)?;
    for n in &grid.nodes {
        w.write_record([
            n.i.to_string(),
            n.j.to_string(),
            n.k.to_string(),
            n.x[0].to_string(),
            n.x[1].to_string(),
            n.x[2].to_string(),
            n.log_density.map_or_else(String::new, |v| v.to_string()),
        ])
        .map_err(io_error)?;
    }
    w.flush()?;
    Ok(())
}

/// One line per (α, κ, n) cell.
pub fn write_study<W: Write>(out: W, report: &StudyReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in &report.rows {
        w.serialize(row).map_err(io_error)?;
    }
    w.flush()?;
    Ok(())
}
