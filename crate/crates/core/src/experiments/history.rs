//! Logged metric histories and their CSV forms.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const HISTORY_HEADER: &str = "algorithm,trial_count,k,rel_residual,rel_error,bregman,elapsed_s";
pub const TIDY_HEADER: &str = "algorithm,k,metric,value";
pub const SPREAD_HEADER: &str = "algorithm,k,metric,mean,min,max";

#[derive(Clone, Debug, PartialEq)]
pub struct HistoryRow {
    pub k: usize,
    pub rel_residual: f64,
    pub rel_error: Option<f64>,
    pub bregman: Option<f64>,
    /// Cumulative algorithm time up to `k`, metric evaluation excluded.
    pub elapsed_s: f64,
}

/// One run's logged metrics. Rows are appended in strictly increasing `k`,
/// starting at `k = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationHistory {
    algorithm: String,
    seed: u64,
    problem: String,
    rows: Vec<HistoryRow>,
    final_x: Vec<f64>,
    metric_s: f64,
}

impl IterationHistory {
    pub fn new(algorithm: impl Into<String>, seed: u64, problem: impl Into<String>) -> Self {
        Self {
            algorithm: algorithm.into(),
            seed,
            problem: problem.into(),
            rows: Vec::new(),
            final_x: Vec::new(),
            metric_s: 0.0,
        }
    }

    pub fn push(&mut self, row: HistoryRow) -> Result<()> {
        match self.rows.last() {
            None if row.k != 0 => {
                return Err(Error::invalid(format!(
                    "history must start at k = 0, got k = {}",
                    row.k
                )))
            }
            Some(last) if row.k <= last.k => {
                return Err(Error::invalid(format!(
                    "history rows must be strictly increasing in k ({} after {})",
                    row.k, last.k
                )))
            }
            Some(last) if last.rel_error.is_some() != row.rel_error.is_some() => {
                return Err(Error::invalid(
                    "rel_error must be present in all rows or none",
                ))
            }
            _ => {}
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn algorithm(&self) -> &str {
        &self.algorithm
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn problem(&self) -> &str {
        &self.problem
    }

    pub fn rows(&self) -> &[HistoryRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&HistoryRow> {
        self.rows.last()
    }

    pub fn final_x(&self) -> &[f64] {
        &self.final_x
    }

    pub(crate) fn set_final_x(&mut self, x: Vec<f64>) {
        self.final_x = x;
    }

    /// Seconds spent evaluating metrics (reported, not included in
    /// `elapsed_s`).
    pub fn metric_seconds(&self) -> f64 {
        self.metric_s
    }

    pub(crate) fn add_metric_seconds(&mut self, s: f64) {
        self.metric_s += s;
    }

    /// Algorithm seconds per iteration over the whole run.
    pub fn seconds_per_iteration(&self) -> Option<f64> {
        let last = self.rows.last()?;
        (last.k > 0).then(|| last.elapsed_s / last.k as f64)
    }
}

/// Mean, minimum and maximum over trials at one logged `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spread {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    pub(crate) fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut n = 0usize;
        let (mut sum, mut min, mut max) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            n += 1;
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        (n > 0).then(|| Spread {
            mean: sum / n as f64,
            min,
            max,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AveragedRow {
    pub k: usize,
    pub rel_residual: Spread,
    pub rel_error: Option<Spread>,
    pub bregman: Option<Spread>,
    pub elapsed_s: Spread,
}

/// Arithmetic means (with min/max) of `T` runs at matched `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AveragedHistory {
    pub algorithm: String,
    pub trial_count: usize,
    pub base_seed: u64,
    pub rows: Vec<AveragedRow>,
    /// Final iterate of each trial, in trial order.
    pub final_iterates: Vec<Vec<f64>>,
    /// Final relative error of each trial, when `x★` is known.
    pub final_errors: Vec<f64>,
}

impl AveragedHistory {
    /// Averages histories given in trial order. Rows are matched by `k`; a
    /// trial that stopped early contributes only to the rows it reached.
    pub fn from_runs(runs: &[IterationHistory], base_seed: u64) -> Result<Self> {
        let first = runs
            .first()
            .ok_or_else(|| Error::invalid("cannot average zero trials"))?;
        let mut ks: Vec<usize> = runs
            .iter()
            .flat_map(|r| r.rows.iter().map(|w| w.k))
            .collect();
        ks.sort_unstable();
        ks.dedup();
        let mut cursors = vec![0usize; runs.len()];
        let mut rows = Vec::with_capacity(ks.len());
        for k in ks {
            let mut at_k: Vec<&HistoryRow> = Vec::with_capacity(runs.len());
            for (run, c) in runs.iter().zip(cursors.iter_mut()) {
                if let Some(row) = run.rows.get(*c).filter(|row| row.k == k) {
                    at_k.push(row);
                    *c += 1;
                }
            }
            let opt = |get: fn(&HistoryRow) -> Option<f64>| {
                let vals: Option<Vec<f64>> = at_k.iter().map(|r| get(r)).collect();
                vals.and_then(Spread::of)
            };
            rows.push(AveragedRow {
                k,
                rel_residual: Spread::of(at_k.iter().map(|r| r.rel_residual))
                    .expect("every logged k has at least one row"),
                rel_error: opt(|r| r.rel_error),
                bregman: opt(|r| r.bregman),
                elapsed_s: Spread::of(at_k.iter().map(|r| r.elapsed_s))
                    .expect("every logged k has at least one row"),
            });
        }
        Ok(Self {
            algorithm: first.algorithm.clone(),
            trial_count: runs.len(),
            base_seed,
            rows,
            final_iterates: runs.iter().map(|r| r.final_x.clone()).collect(),
            final_errors: runs
                .iter()
                .filter_map(|r| r.last().and_then(|w| w.rel_error))
                .collect(),
        })
    }

    pub fn last(&self) -> Option<&AveragedRow> {
        self.rows.last()
    }

    /// Median of the per-trial final relative errors.
    pub fn median_final_error(&self) -> Option<f64> {
        median(&self.final_errors)
    }

    /// Componentwise mean of the trials' final iterates.
    pub fn mean_final_iterate(&self) -> Vec<f64> {
        let Some(first) = self.final_iterates.first() else {
            return Vec::new();
        };
        let mut out = vec![0.0; first.len()];
        for x in &self.final_iterates {
            for (o, v) in out.iter_mut().zip(x) {
                *o += v;
            }
        }
        let t = self.final_iterates.len() as f64;
        out.iter_mut().for_each(|o| *o /= t);
        out
    }

    /// Mean algorithm seconds per iteration at the last logged `k`.
    pub fn seconds_per_iteration(&self) -> Option<f64> {
        let last = self.rows.last()?;
        (last.k > 0).then(|| last.elapsed_s.mean / last.k as f64)
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// One parsed line of a history CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryRecord {
    pub algorithm: String,
    pub trial_count: usize,
    pub row: HistoryRow,
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>, text: &str) -> Result<()> {
    w.write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes mean histories, one block per algorithm.
pub fn write_history_csv(path: impl AsRef<Path>, hists: &[&AveragedHistory]) -> Result<()> {
    let path = path.as_ref();
    let w = create(path)?;
    let mut text = format!("{HISTORY_HEADER}\n");
    for h in hists {
        for r in &h.rows {
            let _ = writeln!(
                text,
                "{},{},{},{:e},{},{},{:e}",
                h.algorithm,
                h.trial_count,
                r.k,
                r.rel_residual.mean,
                opt_cell(r.rel_error.map(|s| s.mean)),
                opt_cell(r.bregman.map(|s| s.mean)),
                r.elapsed_s.mean
            );
        }
    }
    finish(path, w, &text)
}

/// Long format: `algorithm,k,metric,value` with the trial means.
pub fn write_tidy_csv(path: impl AsRef<Path>, hists: &[&AveragedHistory]) -> Result<()> {
    let path = path.as_ref();
    let w = create(path)?;
    let mut text = format!("{TIDY_HEADER}\n");
    for h in hists {
        for r in &h.rows {
            let metrics = [
                ("rel_residual", Some(r.rel_residual)),
                ("rel_error", r.rel_error),
                ("bregman", r.bregman),
                ("elapsed_s", Some(r.elapsed_s)),
            ];
            for (name, s) in metrics {
                if let Some(s) = s {
                    let _ = writeln!(text, "{},{},{name},{:e}", h.algorithm, r.k, s.mean);
                }
            }
        }
    }
    finish(path, w, &text)
}

/// Per-trial spread: `algorithm,k,metric,mean,min,max`.
pub fn write_spread_csv(path: impl AsRef<Path>, hists: &[&AveragedHistory]) -> Result<()> {
    let path = path.as_ref();
    let w = create(path)?;
    let mut text = format!("{SPREAD_HEADER}\n");
    for h in hists {
        for r in &h.rows {
            let metrics = [
                ("rel_residual", Some(r.rel_residual)),
                ("rel_error", r.rel_error),
                ("bregman", r.bregman),
            ];
            for (name, s) in metrics {
                if let Some(s) = s {
                    let _ = writeln!(
                        text,
                        "{},{},{name},{:e},{:e},{:e}",
                        h.algorithm, r.k, s.mean, s.min, s.max
                    );
                }
            }
        }
    }
    finish(path, w, &text)
}

pub fn read_history_csv(path: impl AsRef<Path>) -> Result<Vec<HistoryRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HISTORY_HEADER => {}
        _ => return Err(parse_err(1, format!("expected header {HISTORY_HEADER:?}"))),
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 7 {
            return Err(parse_err(
                line_no,
                format!("expected 7 cells, found {}", cells.len()),
            ));
        }
        let num = |i: usize| -> Result<f64> {
            cells[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| parse_err(line_no, format!("bad number {:?}", cells[i])))
        };
        let opt = |i: usize| -> Result<Option<f64>> {
            if cells[i].trim().is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let int = |i: usize| -> Result<usize> {
            cells[i]
                .trim()
                .parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("bad integer {:?}", cells[i])))
        };
        out.push(HistoryRecord {
            algorithm: cells[0].to_string(),
            trial_count: int(1)?,
            row: HistoryRow {
                k: int(2)?,
                rel_residual: num(3)?,
                rel_error: opt(4)?,
                bregman: opt(5)?,
                elapsed_s: num(6)?,
            },
        });
    }
    Ok(out)
}
