//! Non-negative matrix factorization `X ≈ A·B` by Lee–Seung multiplicative
//! updates on the Frobenius objective.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::sampling::RngStream;

pub const DEFAULT_NMF_SWEEPS: usize = 200;

/// Floor applied to update denominators.
const DENOM_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct NmfFactors {
    /// `m × r`, entrywise non-negative.
    pub a: DenseMatrix,
    /// `r × n`, entrywise non-negative, rows scaled to unit Euclidean norm.
    pub b: DenseMatrix,
    /// `‖X − A·B‖_F` after each sweep.
    pub errors: Vec<f64>,
}

/// Column-major `rows × cols` scratch matrix.
struct Buf {
    rows: usize,
    cols: usize,
    v: Vec<f64>,
}

impl Buf {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            v: vec![0.0; rows * cols],
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.v[j * self.rows + i]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.v[j * self.rows + i]
    }

    /// `selfᵀ · other`
    fn t_mul(&self, other: &Buf) -> Buf {
        let mut out = Buf::zeros(self.cols, other.cols);
        for j in 0..other.cols {
            let oc = &other.v[j * other.rows..(j + 1) * other.rows];
            for i in 0..self.cols {
                let sc = &self.v[i * self.rows..(i + 1) * self.rows];
                *out.at_mut(i, j) = sc.iter().zip(oc).map(|(a, b)| a * b).sum();
            }
        }
        out
    }

    /// `self · otherᵀ`
    fn mul_t(&self, other: &Buf) -> Buf {
        let mut out = Buf::zeros(self.rows, other.rows);
        for k in 0..self.cols {
            for j in 0..other.rows {
                let o = other.at(j, k);
                if o == 0.0 {
                    continue;
                }
                let sc = &self.v[k * self.rows..(k + 1) * self.rows];
                let dst = &mut out.v[j * out.rows..(j + 1) * out.rows];
                for (d, s) in dst.iter_mut().zip(sc) {
                    *d += o * s;
                }
            }
        }
        out
    }

    fn mul(&self, other: &Buf) -> Buf {
        let mut out = Buf::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            for k in 0..self.cols {
                let o = other.at(k, j);
                if o == 0.0 {
                    continue;
                }
                let sc = &self.v[k * self.rows..(k + 1) * self.rows];
                let dst = &mut out.v[j * out.rows..(j + 1) * out.rows];
                for (d, s) in dst.iter_mut().zip(sc) {
                    *d += o * s;
                }
            }
        }
        out
    }
}

fn frob_residual(x: &Buf, a: &Buf, b: &Buf) -> f64 {
    let ab = a.mul(b);
    x.v.iter()
        .zip(&ab.v)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Factorizes non-negative `x` (`m × n`) at rank `r` with `sweeps` rounds of
/// multiplicative updates (`B` first, then `A`). Initial factors are uniform
/// positive draws scaled by `sqrt(mean(X)/r)`.
pub fn nmf(x: &DenseMatrix, rank: usize, sweeps: usize, rng: &mut RngStream) -> Result<NmfFactors> {
    let (m, n) = x.shape();
    if rank == 0 || rank > m.min(n) {
        return Err(Error::invalid(format!(
            "nmf rank must be in 1..={}, got {rank}",
            m.min(n)
        )));
    }
    if let Some((k, v)) = x.data().iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::invalid(format!(
            "nmf input must be non-negative; entry ({}, {}) is {v}",
            k % m + 1,
            k / m + 1
        )));
    }
    let xb = Buf {
        rows: m,
        cols: n,
        v: x.data().to_vec(),
    };
    let mean = xb.v.iter().sum::<f64>() / (m * n) as f64;
    let scale = (mean / rank as f64).sqrt();
    let mut init = |rows: usize, cols: usize| Buf {
        rows,
        cols,
        v: (0..rows * cols)
            .map(|_| scale * (1.0 - rng.uniform()))
            .collect(),
    };
    let mut a = init(m, rank);
    let mut b = init(rank, n);

    let mut errors = Vec::with_capacity(sweeps);
    for _ in 0..sweeps {
        // B ← B ⊙ (AᵀX) ⊘ (AᵀA·B)
        let atx = a.t_mul(&xb);
        let ata_b = a.t_mul(&a).mul(&b);
        for ((bv, num), den) in b.v.iter_mut().zip(&atx.v).zip(&ata_b.v) {
            *bv *= num / den.max(DENOM_FLOOR);
        }
        // A ← A ⊙ (XBᵀ) ⊘ (A·BBᵀ)
        let xbt = xb.mul_t(&b);
        let a_bbt = a.mul(&b.mul_t(&b));
        for ((av, num), den) in a.v.iter_mut().zip(&xbt.v).zip(&a_bbt.v) {
            *av *= num / den.max(DENOM_FLOOR);
        }
        errors.push(frob_residual(&xb, &a, &b));
    }

    // unit-norm rows of B, scale moved into the columns of A
    for k in 0..rank {
        let nrm = (0..n).map(|j| b.at(k, j).powi(2)).sum::<f64>().sqrt();
        if nrm > 0.0 {
            for j in 0..n {
                *b.at_mut(k, j) /= nrm;
            }
            for i in 0..m {
                *a.at_mut(i, k) *= nrm;
            }
        }
    }

    Ok(NmfFactors {
        a: DenseMatrix::from_col_major(m, rank, a.v)?,
        b: DenseMatrix::from_col_major(rank, n, b.v)?,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(x: &DenseMatrix, f: &NmfFactors) -> f64 {
        let ab = f.a.matmul(&f.b).unwrap();
        let d: f64 = x
            .data()
            .iter()
            .zip(ab.data())
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        d / x.frob()
    }

    #[test]
    fn recovers_rank_one() {
        let mut rng = RngStream::new(60);
        let u: Vec<f64> = (0..30).map(|_| rng.uniform() + 0.1).collect();
        let v: Vec<f64> = (0..8).map(|_| rng.uniform() + 0.1).collect();
        let x = DenseMatrix::from_fn(30, 8, |i, j| u[i] * v[j]).unwrap();
        let f = nmf(&x, 1, 500, &mut rng).unwrap();
        assert!(rel_err(&x, &f) < 1e-2);
    }

    #[test]
    fn monotone_and_nonnegative() {
        let mut rng = RngStream::new(61);
        let x = DenseMatrix::from_fn(40, 9, |i, j| ((i * 7 + j * 3) % 11) as f64 + rng.uniform())
            .unwrap();
        let f = nmf(&x, 3, 150, &mut rng).unwrap();
        assert!(f.errors.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        assert!(f.a.data().iter().all(|v| *v >= 0.0));
        assert!(f.b.data().iter().all(|v| *v >= 0.0));
        for k in 0..3 {
            let nrm: f64 = f.b.row(k).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((nrm - 1.0).abs() < 1e-12);
        }
        // normalization does not change the product
        assert!((rel_err(&x, &f) * x.frob() - f.errors.last().unwrap()).abs() < 1e-9 * x.frob());
    }

    #[test]
    fn zero_input() {
        let mut rng = RngStream::new(62);
        let x = DenseMatrix::from_col_major(5, 4, vec![0.0; 20]).unwrap();
        let f = nmf(&x, 2, 3, &mut rng).unwrap();
        let ab = f.a.matmul(&f.b).unwrap();
        assert!(ab.data().iter().all(|v| *v == 0.0));
        assert!(f.errors.iter().all(|e| *e == 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        let mut rng = RngStream::new(63);
        let x = DenseMatrix::from_rows(&[vec![1.0, -1.0], vec![0.0, 2.0]]).unwrap();
        assert!(nmf(&x, 1, 5, &mut rng).is_err());
        let x = DenseMatrix::identity(2).unwrap();
        assert!(nmf(&x, 3, 5, &mut rng).is_err());
        assert!(nmf(&x, 0, 5, &mut rng).is_err());
    }
}
