use super::{dot, DenseMatrix};
use crate::error::{Error, Result};

/// Relative pivot threshold below which `R` is treated as singular.
pub const RANK_TOL: f64 = 1e-12;

/// Householder QR of a tall matrix, `M = Q·R` with `Q = H₀·H₁⋯H_{n-1}`.
///
/// The reflectors are kept in factored form; `Q` is only materialized on
/// request (`thin_q`, `full_q`).
#[derive(Clone, Debug)]
pub struct HouseholderQr {
    rows: usize,
    cols: usize,
    /// `v_k` has length `rows - k`; `H_k = I - beta_k v_k v_kᵀ` acts on rows `k..`.
    reflectors: Vec<Vec<f64>>,
    betas: Vec<f64>,
    /// Upper triangle, column-major `cols × cols`.
    r: Vec<f64>,
}

/// Thin Householder QR; fails if `M` is numerically rank deficient.
pub fn householder_qr(m: &DenseMatrix) -> Result<HouseholderQr> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(Error::invalid(format!(
            "householder_qr needs rows >= cols, got {rows}x{cols}"
        )));
    }
    let mut work = m.data().to_vec();
    let mut reflectors = Vec::with_capacity(cols);
    let mut betas = Vec::with_capacity(cols);
    let mut r = vec![0.0; cols * cols];

    for k in 0..cols {
        let x = &work[k * rows + k..(k + 1) * rows];
        let xnorm = dot(x, x).sqrt();
        let mut v = x.to_vec();
        let (alpha, beta) = if xnorm == 0.0 {
            (0.0, 0.0)
        } else {
            let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
            v[0] -= alpha;
            let vv = dot(&v, &v);
            (alpha, if vv > 0.0 { 2.0 / vv } else { 0.0 })
        };
        r[k * cols + k] = alpha;
        for j in k + 1..cols {
            let col = &mut work[j * rows + k..(j + 1) * rows];
            let s = beta * dot(&v, col);
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= s * vi;
            }
            r[j * cols + k] = col[0];
        }
        reflectors.push(v);
        betas.push(beta);
    }

    let threshold = RANK_TOL * m.frob();
    for k in 0..cols {
        let value = r[k * cols + k].abs();
        if value < threshold || value == 0.0 {
            return Err(Error::RankDeficient {
                index: k + 1,
                value,
                threshold,
            });
        }
    }

    Ok(HouseholderQr {
        rows,
        cols,
        reflectors,
        betas,
        r,
    })
}

impl HouseholderQr {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn reflect(&self, k: usize, w: &mut [f64]) {
        let v = &self.reflectors[k];
        let tail = &mut w[k..];
        let s = self.betas[k] * dot(v, tail);
        if s != 0.0 {
            for (t, vi) in tail.iter_mut().zip(v) {
                *t -= s * vi;
            }
        }
    }

    /// `Q·w` for `w` of length `rows`.
    pub fn apply_q(&self, w: &mut [f64]) {
        assert_eq!(w.len(), self.rows);
        for k in (0..self.cols).rev() {
            self.reflect(k, w);
        }
    }

    /// `Qᵀ·w` for `w` of length `rows`.
    pub fn apply_qt(&self, w: &mut [f64]) {
        assert_eq!(w.len(), self.rows);
        for k in 0..self.cols {
            self.reflect(k, w);
        }
    }

    pub fn r(&self) -> DenseMatrix {
        DenseMatrix::from_col_major(self.cols, self.cols, self.r.clone()).expect("R is square")
    }

    #[inline]
    fn r_at(&self, i: usize, j: usize) -> f64 {
        self.r[j * self.cols + i]
    }

    fn q_columns(&self, count: usize) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.rows * count);
        for j in 0..count {
            let mut e = vec![0.0; self.rows];
            e[j] = 1.0;
            self.apply_q(&mut e);
            data.extend(e);
        }
        DenseMatrix::from_col_major(self.rows, count, data).expect("Q dimensions are consistent")
    }

    /// First `cols` columns of `Q`, an orthonormal basis of `ran(M)`.
    pub fn thin_q(&self) -> DenseMatrix {
        self.q_columns(self.cols)
    }

    /// Full orthogonal `rows × rows` factor. Its trailing `rows - cols`
    /// columns span `null(Mᵀ)`.
    pub fn full_q(&self) -> DenseMatrix {
        self.q_columns(self.rows)
    }

    /// `N·v` where `N` holds the trailing `rows - cols` columns of the full
    /// `Q`, computed without forming `Q`.
    pub fn null_combination(&self, v: &[f64]) -> Result<Vec<f64>> {
        let dim = self.rows - self.cols;
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                op: "null_combination",
                expected: dim,
                got: v.len(),
            });
        }
        let mut w = vec![0.0; self.rows];
        w[self.cols..].copy_from_slice(v);
        self.apply_q(&mut w);
        Ok(w)
    }

    /// Solves `R·x = rhs`.
    fn solve_upper(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.cols;
        let mut x = rhs[..n].to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.r_at(i, j) * x[j];
            }
            x[i] = s / self.r_at(i, i);
        }
        x
    }

    /// Solves `Rᵀ·x = rhs`.
    fn solve_upper_t(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.cols;
        let mut x = rhs.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.r_at(j, i) * x[j];
            }
            x[i] = s / self.r_at(i, i);
        }
        x
    }

    /// `argmin ‖rhs − M·y‖₂`.
    pub fn solve_least_squares(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.rows {
            return Err(Error::DimensionMismatch {
                op: "least_squares_solve",
                expected: self.rows,
                got: rhs.len(),
            });
        }
        let mut w = rhs.to_vec();
        self.apply_qt(&mut w);
        Ok(self.solve_upper(&w))
    }

    /// Minimum-norm solution of the wide system `Mᵀ·x = rhs`, i.e. `(Mᵀ)†·rhs`.
    pub fn solve_min_norm_transposed(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "min_norm_solve",
                expected: self.cols,
                got: rhs.len(),
            });
        }
        let u = self.solve_upper_t(rhs);
        let mut w = vec![0.0; self.rows];
        w[..self.cols].copy_from_slice(&u);
        self.apply_q(&mut w);
        Ok(w)
    }

    /// Orthogonal projection of `v` onto `ran(M)`.
    pub fn project_range(&self, v: &[f64]) -> Vec<f64> {
        let mut w = v.to_vec();
        self.apply_qt(&mut w);
        for t in &mut w[self.cols..] {
            *t = 0.0;
        }
        self.apply_q(&mut w);
        w
    }
}

/// `M†·rhs` for full-column-rank `M`.
pub fn least_squares_solve(m: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    householder_qr(m)?.solve_least_squares(rhs)
}

/// Minimum-norm solution of the consistent wide system `W·x = rhs`
/// (`W` full row rank), via QR of `Wᵀ`.
pub fn min_norm_solve(w: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    householder_qr(&w.transpose())?.solve_min_norm_transposed(rhs)
}
