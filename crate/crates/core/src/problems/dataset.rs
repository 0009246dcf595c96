use std::fs::File;
use std::path::Path;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Detects `;` versus `,` from the first line of a file.
pub fn sniff_delimiter(path: impl AsRef<Path>) -> Result<u8> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })?;
    let first = text.lines().next().unwrap_or("");
    Ok(if first.contains(';') { b';' } else { b',' })
}

/// How to read a numeric dataset file.
#[derive(Clone, Debug)]
pub struct DatasetOptions {
    pub delimiter: u8,
    /// 0-based columns to drop (label columns and the like).
    pub exclude: Vec<usize>,
    /// Drop the last column regardless of its index.
    pub exclude_last: bool,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            exclude: Vec::new(),
            exclude_last: false,
        }
    }
}

impl DatasetOptions {
    /// The UCI wine-quality layout: eleven properties followed by the
    /// `quality` label, which is dropped.
    pub fn wine(delimiter: u8) -> Self {
        Self {
            delimiter,
            exclude: Vec::new(),
            exclude_last: true,
        }
    }
}

/// Reads a numeric CSV into an `m × n` matrix. A first row containing any
/// non-numeric cell is treated as a header and skipped.
pub fn load_csv_dataset(path: impl AsRef<Path>, opts: &DatasetOptions) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(opts.delimiter)
        .trim(csv::Trim::All)
        .from_reader(file);

    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut width: Option<usize> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|c| c.parse::<f64>().ok()).collect();
        if idx == 0 && parsed.iter().any(Option::is_none) {
            // header
            width = Some(record.len());
            continue;
        }
        match width {
            Some(w) if w != record.len() => {
                return Err(parse_err(
                    line,
                    format!("expected {w} columns, found {}", record.len()),
                ))
            }
            None => width = Some(record.len()),
            _ => {}
        }
        let mut row = Vec::with_capacity(record.len());
        for (j, (cell, value)) in record.iter().zip(parsed).enumerate() {
            let keep = !opts.exclude.contains(&j) && !(opts.exclude_last && j + 1 == record.len());
            if !keep {
                continue;
            }
            match value {
                Some(v) => row.push(v),
                None => {
                    return Err(parse_err(
                        line,
                        format!("non-numeric cell {cell:?} in column {}", j + 1),
                    ))
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(parse_err(0, "no data rows/columns".into()));
    }
    DenseMatrix::from_rows(&rows)
}
