//! Problem directories: `A.csv`, `B.csv`, `b.csv`, optional `xstar.csv`, and
//! a `meta.txt` of `key=value` lines.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{FactorizedProblem, ProblemMeta};
use crate::dense::{read_matrix_csv, read_vector_csv, write_matrix_csv, write_vector_csv};
use crate::error::{Error, Result};

pub const META_FILE: &str = "meta.txt";

const A_FILE: &str = "A.csv";
const B_FILE: &str = "B.csv";
const RHS_FILE: &str = "b.csv";
const XSTAR_FILE: &str = "xstar.csv";

pub fn save_problem(p: &FactorizedProblem, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_matrix_csv(dir.join(A_FILE), p.a())?;
    write_matrix_csv(dir.join(B_FILE), p.b())?;
    write_vector_csv(dir.join(RHS_FILE), p.rhs())?;
    let xs_path = dir.join(XSTAR_FILE);
    match p.x_star() {
        Some(xs) => write_vector_csv(&xs_path, xs)?,
        None if xs_path.exists() => {
            fs::remove_file(&xs_path).map_err(|e| Error::io(&xs_path, e))?
        }
        None => {}
    }

    let (m, l, n) = p.dims();
    let meta = p.meta();
    let mut text = format!("m={m}\nl={l}\nn={n}\n");
    if let Some(s) = meta.s {
        text.push_str(&format!("s={s}\n"));
    }
    text.push_str(&format!("consistent={}\n", p.consistent()));
    if let Some(seed) = meta.seed {
        text.push_str(&format!("seed={seed}\n"));
    }
    if let Some(label) = &meta.label {
        text.push_str(&format!("label={label}\n"));
    }
    let meta_path = dir.join(META_FILE);
    fs::write(&meta_path, text).map_err(|e| Error::io(&meta_path, e))
}

fn parse_meta(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })?;
    let mut map = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            msg: format!("expected key=value, found {line:?}"),
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn meta_value<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
    path: &Path,
) -> Result<Option<T>> {
    map.get(key)
        .map(|v| {
            v.parse::<T>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                msg: format!("bad value for {key}: {v:?}"),
            })
        })
        .transpose()
}

fn shape_error(path: &Path, what: &str, expected: usize, got: usize) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: format!("{what}: expected {expected}, found {got}"),
    }
}

pub fn load_problem(dir: impl AsRef<Path>) -> Result<FactorizedProblem> {
    let dir = dir.as_ref();
    let meta_path = dir.join(META_FILE);
    let map = parse_meta(&meta_path)?;
    let a_path = dir.join(A_FILE);
    let b_path = dir.join(B_FILE);
    let rhs_path = dir.join(RHS_FILE);
    let xs_path = dir.join(XSTAR_FILE);
    for p in [&a_path, &b_path, &rhs_path] {
        if !p.exists() {
            return Err(Error::MissingFile(p.clone()));
        }
    }
    let a = read_matrix_csv(&a_path)?;
    let b = read_matrix_csv(&b_path)?;
    let rhs = read_vector_csv(&rhs_path)?;
    let x_star = if xs_path.exists() {
        Some(read_vector_csv(&xs_path)?)
    } else {
        None
    };

    let get = |k: &str| meta_value::<usize>(&map, k, &meta_path);
    if let Some(m) = get("m")? {
        if a.rows() != m {
            return Err(shape_error(&a_path, "rows (m)", m, a.rows()));
        }
        if rhs.len() != m {
            return Err(shape_error(&rhs_path, "length (m)", m, rhs.len()));
        }
    }
    if let Some(l) = get("l")? {
        if a.cols() != l {
            return Err(shape_error(&a_path, "columns (l)", l, a.cols()));
        }
        if b.rows() != l {
            return Err(shape_error(&b_path, "rows (l)", l, b.rows()));
        }
    }
    if let Some(n) = get("n")? {
        if b.cols() != n {
            return Err(shape_error(&b_path, "columns (n)", n, b.cols()));
        }
        if let Some(xs) = &x_star {
            if xs.len() != n {
                return Err(shape_error(&xs_path, "length (n)", n, xs.len()));
            }
        }
    }
    if a.cols() != b.rows() {
        return Err(shape_error(
            &b_path,
            "rows (columns of A)",
            a.cols(),
            b.rows(),
        ));
    }
    if rhs.len() != a.rows() {
        return Err(shape_error(
            &rhs_path,
            "length (rows of A)",
            a.rows(),
            rhs.len(),
        ));
    }

    let consistent = meta_value::<bool>(&map, "consistent", &meta_path)?.unwrap_or(true);
    let meta = ProblemMeta {
        s: get("s")?,
        seed: meta_value::<u64>(&map, "seed", &meta_path)?,
        label: map.get("label").cloned(),
    };
    FactorizedProblem::new(a, b, rhs, x_star, consistent, meta)
}
