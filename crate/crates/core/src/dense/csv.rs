//! Plain numeric CSV: one matrix row per line, comma separated, no header.
//! Values are written in shortest round-trip form, so a save/load cycle is
//! bit-exact.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::DenseMatrix;
use crate::error::{Error, Result};

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })
}

fn parse_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(open(path)?);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let row = record
            .iter()
            .map(|cell| {
                cell.parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("not a number: {cell:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: "empty file".into(),
        });
    }
    Ok(rows)
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    DenseMatrix::from_rows(&parse_rows(path.as_ref())?)
}

/// Reads a single-column CSV.
pub fn read_vector_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let rows = parse_rows(path)?;
    if rows[0].len() != 1 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("vector file must have one column, found {}", rows[0].len()),
        });
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_matrix_csv(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let mut line = String::new();
    for i in 0..m.rows() {
        line.clear();
        for j in 0..m.cols() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{:e}", m.get(i, j)));
        }
        line.push('\n');
        w.write_all(line.as_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_vector_csv(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for x in v {
        writeln!(w, "{x:e}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::RngStream;
    use proptest::prelude::*;

    #[test]
    fn small_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        std::fs::write(&p, "1,2\n3,4\n").unwrap();
        let m = read_matrix_csv(&p).unwrap();
        assert_eq!(m.row(0), vec![1.0, 2.0]);
        assert_eq!(m.row(1), vec![3.0, 4.0]);
    }

    #[test]
    fn ragged_and_bad_cells() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "1,2\n3\n").unwrap();
        assert!(matches!(
            read_matrix_csv(&p),
            Err(Error::Parse { line: 2, .. })
        ));
        std::fs::write(&p, "1,2\n3,x\n").unwrap();
        assert!(matches!(
            read_matrix_csv(&p),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_matrix_csv(dir.path().join("nope.csv")),
            Err(Error::MissingFile(_))
        ));
    }

    #[test]
    fn random_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = RngStream::new(40);
        let m = DenseMatrix::gaussian(7, 3, &mut rng).unwrap();
        let p = dir.path().join("g.csv");
        write_matrix_csv(&p, &m).unwrap();
        assert_eq!(read_matrix_csv(&p).unwrap(), m);
    }

    proptest! {
        #[test]
        fn vector_round_trip_is_exact(v in prop::collection::vec(
            prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 1..40)) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("v.csv");
            write_vector_csv(&p, &v).unwrap();
            let back = read_vector_csv(&p).unwrap();
            prop_assert_eq!(back.len(), v.len());
            for (a, b) in back.iter().zip(&v) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
