//! Factorized test problems `A·B·x = b`: Gaussian generators with sparse
//! ground truth, CSV dataset ingestion, NMF factorization, and the on-disk
//! problem directory format.

mod dataset;
mod gaussian;
mod io;
mod nmf;

use std::sync::OnceLock;
use std::time::Instant;

pub use self::dataset::{load_csv_dataset, sniff_delimiter, DatasetOptions};
pub use self::gaussian::{gen_gaussian, with_target, INCONSISTENT_ROW_CEILING};
pub use self::io::{load_problem, save_problem, META_FILE};
pub use self::nmf::{nmf, NmfFactors, DEFAULT_NMF_SWEEPS};

use crate::dense::{householder_qr, norm, sub, DenseMatrix};
use crate::error::{Error, Result};
use crate::sampling::RngStream;

/// Provenance recorded alongside a problem.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProblemMeta {
    /// Sparsity of the ground truth, when known.
    pub s: Option<usize>,
    pub seed: Option<u64>,
    pub label: Option<String>,
}

/// `A·B·x = b` with `A ∈ ℝ^{m×ℓ}`, `B ∈ ℝ^{ℓ×n}`, `rank(A) = rank(B) = ℓ`.
///
/// `consistent` records whether `b ∈ ran(A·B)` by construction. The product
/// `C = A·B` is only formed on demand, for the full-system baselines.
#[derive(Debug)]
pub struct FactorizedProblem {
    a: DenseMatrix,
    b: DenseMatrix,
    rhs: Vec<f64>,
    x_star: Option<Vec<f64>>,
    consistent: bool,
    meta: ProblemMeta,
    product: OnceLock<DenseMatrix>,
    product_secs: OnceLock<f64>,
}

impl FactorizedProblem {
    /// Validates shapes, the full-rank assumption on both factors, and (when
    /// a ground truth is supplied) that it solves the system in the stated
    /// sense.
    pub fn new(
        a: DenseMatrix,
        b: DenseMatrix,
        rhs: Vec<f64>,
        x_star: Option<Vec<f64>>,
        consistent: bool,
        meta: ProblemMeta,
    ) -> Result<Self> {
        let (m, l) = a.shape();
        if b.rows() != l {
            return Err(Error::DimensionMismatch {
                op: "FactorizedProblem: rows of B",
                expected: l,
                got: b.rows(),
            });
        }
        if rhs.len() != m {
            return Err(Error::DimensionMismatch {
                op: "FactorizedProblem: length of b",
                expected: m,
                got: rhs.len(),
            });
        }
        if let Some(xs) = &x_star {
            if xs.len() != b.cols() {
                return Err(Error::DimensionMismatch {
                    op: "FactorizedProblem: length of x_star",
                    expected: b.cols(),
                    got: xs.len(),
                });
            }
        }
        if m < l || b.cols() < l {
            return Err(Error::invalid(format!(
                "factorized system needs m >= l and n >= l, got m={m}, l={l}, n={}",
                b.cols()
            )));
        }
        householder_qr(&a)?;
        householder_qr(&b.transpose())?;

        let p = Self {
            a,
            b,
            rhs,
            x_star,
            consistent,
            meta,
            product: OnceLock::new(),
            product_secs: OnceLock::new(),
        };
        p.check_ground_truth()?;
        Ok(p)
    }

    fn check_ground_truth(&self) -> Result<()> {
        let Some(xs) = &self.x_star else {
            return Ok(());
        };
        let bnorm = norm(&self.rhs);
        let residual = sub(&self.rhs, &self.apply(xs)?);
        if self.consistent {
            let r = norm(&residual);
            if r > 1e-10 * bnorm {
                return Err(Error::invalid(format!(
                    "x_star does not solve the consistent system: ‖b − ABx★‖ = {r:e}, ‖b‖ = {bnorm:e}"
                )));
            }
        } else {
            let g = norm(&self.apply_t(&residual)?);
            let scale = self.a.frob() * self.b.frob() * bnorm;
            if g > 1e-8 * scale {
                return Err(Error::invalid(format!(
                    "x_star is not a least-squares solution: ‖BᵀAᵀ(b − ABx★)‖ = {g:e}"
                )));
            }
        }
        Ok(())
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn x_star(&self) -> Option<&[f64]> {
        self.x_star.as_deref()
    }

    pub fn consistent(&self) -> bool {
        self.consistent
    }

    pub fn meta(&self) -> &ProblemMeta {
        &self.meta
    }

    /// `(m, ℓ, n)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.a.rows(), self.a.cols(), self.b.cols())
    }

    /// `A·(B·x)`, never forming `C`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.a.matvec(&self.b.matvec(x)?)
    }

    /// `Bᵀ·(Aᵀ·v)`.
    pub fn apply_t(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.b.matvec_t(&self.a.matvec_t(v)?)
    }

    /// The materialized product `C = A·B`, computed on first use.
    pub fn product(&self) -> &DenseMatrix {
        self.product_timed().0
    }

    /// The product together with the wall-clock seconds it took to form.
    pub fn product_timed(&self) -> (&DenseMatrix, f64) {
        let c = self.product.get_or_init(|| {
            let t = Instant::now();
            let c = self
                .a
                .matmul(&self.b)
                .expect("factor shapes validated at construction");
            let _ = self.product_secs.set(t.elapsed().as_secs_f64());
            c
        });
        (c, self.product_secs.get().copied().unwrap_or(0.0))
    }

    pub fn product_is_materialized(&self) -> bool {
        self.product.get().is_some()
    }

    pub fn describe(&self) -> String {
        let (m, l, n) = self.dims();
        let kind = if self.consistent {
            "consistent"
        } else {
            "inconsistent"
        };
        match &self.meta.label {
            Some(label) => format!("{label} m={m} l={l} n={n} {kind}"),
            None => format!("m={m} l={l} n={n} {kind}"),
        }
    }
}

impl Clone for FactorizedProblem {
    fn clone(&self) -> Self {
        let product = OnceLock::new();
        let product_secs = OnceLock::new();
        if let Some(c) = self.product.get() {
            let _ = product.set(c.clone());
        }
        if let Some(t) = self.product_secs.get() {
            let _ = product_secs.set(*t);
        }
        Self {
            a: self.a.clone(),
            b: self.b.clone(),
            rhs: self.rhs.clone(),
            x_star: self.x_star.clone(),
            consistent: self.consistent,
            meta: self.meta.clone(),
            product,
            product_secs,
        }
    }
}

/// Length-11 target with ones at (1-based) positions 1, 6 and 11.
pub fn wine_target() -> Vec<f64> {
    let mut x = vec![0.0; 11];
    for i in [0, 5, 10] {
        x[i] = 1.0;
    }
    x
}

/// Rank used for the wine factorization.
pub const WINE_RANK: usize = 5;

/// Factorizes a non-negative data matrix and builds the matching consistent
/// and inconsistent problems around the same factors and `x★`.
pub fn factorized_pair_from_data(
    data: &DenseMatrix,
    rank: usize,
    sweeps: usize,
    x_star: Vec<f64>,
    rng: &mut RngStream,
    label: &str,
) -> Result<(FactorizedProblem, FactorizedProblem)> {
    let NmfFactors { a, b, .. } = nmf(data, rank, sweeps, rng)?;
    let seed = Some(rng.seed());
    let sparsity = x_star.iter().filter(|v| **v != 0.0).count();
    let meta = |kind: &str| ProblemMeta {
        s: Some(sparsity),
        seed,
        label: Some(format!("{label}-{kind}")),
    };
    let consistent = with_target(
        a.clone(),
        b.clone(),
        x_star.clone(),
        true,
        rng,
        meta("consistent"),
    )?;
    let inconsistent = with_target(a, b, x_star, false, rng, meta("inconsistent"))?;
    Ok((consistent, inconsistent))
}
