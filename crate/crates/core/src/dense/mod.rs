//! Column-major dense matrices with cached row/column norms and the small
//! direct factorizations used as oracles (Householder QR, Jacobi eigensolve).

mod csv;
mod eig;
mod qr;

pub use self::csv::{read_matrix_csv, read_vector_csv, write_matrix_csv, write_vector_csv};
pub use self::eig::{sigma_min, symmetric_eigenvalues};
pub use self::qr::{householder_qr, least_squares_solve, min_norm_solve, HouseholderQr};

use crate::error::{Error, Result};
use crate::sampling::{RngStream, WeightedSampler};

/// Dense real matrix stored column-major.
///
/// Immutable after construction. Squared row norms, squared column norms and
/// the squared Frobenius norm are computed once, together with the
/// norm-proportional row and column samplers (absent for a zero matrix).
#[derive(Clone, Debug)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    row_norms_sq: Vec<f64>,
    col_norms_sq: Vec<f64>,
    frob_sq: f64,
    row_sampler: Option<WeightedSampler>,
    col_sampler: Option<WeightedSampler>,
}

impl PartialEq for DenseMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl DenseMatrix {
    /// Builds a matrix from column-major `data`.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "DenseMatrix::from_col_major",
                expected: rows * cols,
                got: data.len(),
            });
        }
        let mut row_norms_sq = vec![0.0; rows];
        let mut col_norms_sq = vec![0.0; cols];
        for (j, col) in data.chunks_exact(rows).enumerate() {
            let mut s = 0.0;
            for (i, &v) in col.iter().enumerate() {
                let sq = v * v;
                s += sq;
                row_norms_sq[i] += sq;
            }
            col_norms_sq[j] = s;
        }
        let frob_sq = col_norms_sq.iter().sum();
        let row_sampler = WeightedSampler::new(&row_norms_sq).ok();
        let col_sampler = WeightedSampler::new(&col_norms_sq).ok();
        Ok(Self {
            rows,
            cols,
            data,
            row_norms_sq,
            col_norms_sq,
            frob_sq,
            row_sampler,
            col_sampler,
        })
    }

    /// Builds a matrix from row-major `data`.
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "DenseMatrix::from_row_major",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Self::from_fn(rows, cols, |i, j| data[i * cols + j])
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                op: "DenseMatrix::from_rows",
                expected: n,
                got: bad.len(),
            });
        }
        Self::from_fn(m, n, |i, j| rows[i][j])
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self::from_col_major(rows, cols, data)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diag(d: &[f64]) -> Result<Self> {
        Self::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    /// Matrix with i.i.d. standard normal entries, drawn column by column.
    pub fn gaussian(rows: usize, cols: usize, rng: &mut RngStream) -> Result<Self> {
        let data = rng.normal_vec(rows * cols);
        Self::from_col_major(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn row_norms_sq(&self) -> &[f64] {
        &self.row_norms_sq
    }

    pub fn col_norms_sq(&self) -> &[f64] {
        &self.col_norms_sq
    }

    #[inline]
    pub fn row_norm_sq(&self, i: usize) -> f64 {
        self.row_norms_sq[i]
    }

    #[inline]
    pub fn col_norm_sq(&self, j: usize) -> f64 {
        self.col_norms_sq[j]
    }

    pub fn frob_sq(&self) -> f64 {
        self.frob_sq
    }

    pub fn frob(&self) -> f64 {
        self.frob_sq.sqrt()
    }

    /// Row index drawn with probability `‖M_{i,:}‖² / ‖M‖_F²`.
    pub fn sample_row(&self, rng: &mut RngStream) -> Result<usize> {
        self.row_sampler
            .as_ref()
            .map(|s| s.sample(rng))
            .ok_or(Error::ZeroWeights)
    }

    /// Column index drawn with probability `‖M_{:,j}‖² / ‖M‖_F²`.
    pub fn sample_col(&self, rng: &mut RngStream) -> Result<usize> {
        self.col_sampler
            .as_ref()
            .map(|s| s.sample(rng))
            .ok_or(Error::ZeroWeights)
    }

    pub fn row_sampler(&self) -> Result<&WeightedSampler> {
        self.row_sampler.as_ref().ok_or(Error::ZeroWeights)
    }

    pub fn col_sampler(&self) -> Result<&WeightedSampler> {
        self.col_sampler.as_ref().ok_or(Error::ZeroWeights)
    }

    pub fn check_row(&self, i: usize) -> Result<()> {
        if i < self.rows {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                what: "row",
                index: i + 1,
                len: self.rows,
            })
        }
    }

    pub fn check_col(&self, j: usize) -> Result<()> {
        if j < self.cols {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                what: "column",
                index: j + 1,
                len: self.cols,
            })
        }
    }

    /// `M·v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "matvec",
                expected: self.cols,
                got: v.len(),
            });
        }
        let mut out = vec![0.0; self.rows];
        for (col, &vj) in self.data.chunks_exact(self.rows).zip(v) {
            if vj != 0.0 {
                axpy(vj, col, &mut out);
            }
        }
        Ok(out)
    }

    /// `Mᵀ·v`.
    pub fn matvec_t(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                op: "matvec_t",
                expected: self.rows,
                got: v.len(),
            });
        }
        Ok(self
            .data
            .chunks_exact(self.rows)
            .map(|col| dot(col, v))
            .collect())
    }

    /// `⟨M_{i,:}, v⟩`, reading only row `i`.
    pub fn row_dot(&self, i: usize, v: &[f64]) -> Result<f64> {
        self.check_row(i)?;
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "row_dot",
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok(self.row_dot_unchecked(i, v))
    }

    #[inline]
    pub(crate) fn row_dot_unchecked(&self, i: usize, v: &[f64]) -> f64 {
        self.data[i..]
            .iter()
            .step_by(self.rows)
            .zip(v)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// `out += alpha · M_{i,:}ᵀ`.
    #[inline]
    pub(crate) fn add_row_scaled(&self, i: usize, alpha: f64, out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(self.data[i..].iter().step_by(self.rows)) {
            *o += alpha * a;
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
            .expect("transpose of a valid matrix is valid")
    }

    /// `self · other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for j in 0..other.cols {
            data.extend(self.matvec(other.col(j))?);
        }
        Self::from_col_major(self.rows, other.cols, data)
    }

    /// `selfᵀ · self`, symmetric `cols × cols`.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..=j {
                let v = dot(self.col(i), self.col(j));
                g[j * n + i] = v;
                g[i * n + j] = v;
            }
        }
        Self::from_col_major(n, n, g).expect("gram dimensions are consistent")
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm_sq(v: &[f64]) -> f64 {
    dot(v, v)
}

pub fn norm(v: &[f64]) -> f64 {
    norm_sq(v).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m22() -> DenseMatrix {
        DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap()
    }

    #[test]
    fn matvec_cases() {
        let i2 = DenseMatrix::identity(2).unwrap();
        assert_eq!(i2.matvec(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
        assert_eq!(m22().matvec(&[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
        let z = DenseMatrix::from_col_major(2, 2, vec![0.0; 4]).unwrap();
        assert_eq!(z.matvec(&[5.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(
            m22().matvec(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(m22().matvec_t(&[1.0, 1.0]).unwrap(), vec![4.0, 6.0]);
    }

    #[test]
    fn row_dot_cases() {
        let i3 = DenseMatrix::identity(3).unwrap();
        assert_eq!(i3.row_dot(1, &[7.0, 8.0, 9.0]).unwrap(), 8.0);
        let one = DenseMatrix::from_rows(&[vec![2.0]]).unwrap();
        assert_eq!(one.row_dot(0, &[3.0]).unwrap(), 6.0);
        assert!(matches!(
            i3.row_dot(3, &[0.0; 3]),
            Err(Error::IndexOutOfRange { index: 4, .. })
        ));

        let mut rng = RngStream::new(5);
        let m = DenseMatrix::gaussian(5, 4, &mut rng).unwrap();
        let v = rng.normal_vec(4);
        let full = m.matvec(&v).unwrap();
        for (i, fi) in full.iter().enumerate() {
            assert!((m.row_dot(i, &v).unwrap() - fi).abs() < 1e-14);
        }
    }

    #[test]
    fn cached_norms_agree() {
        let mut rng = RngStream::new(8);
        let m = DenseMatrix::gaussian(17, 9, &mut rng).unwrap();
        let rs: f64 = m.row_norms_sq().iter().sum();
        let cs: f64 = m.col_norms_sq().iter().sum();
        assert!((rs - m.frob_sq()).abs() <= 1e-12 * m.frob_sq());
        assert!((cs - m.frob_sq()).abs() <= 1e-12 * m.frob_sq());
        let direct: f64 = m.data().iter().map(|v| v * v).sum();
        assert!((direct - m.frob_sq()).abs() <= 1e-12 * direct);
    }

    #[test]
    fn layout_and_transpose() {
        let m = DenseMatrix::from_row_major(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(m.data(), &[1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
        assert_eq!(m.row(1), vec![4.0, 5.0, 6.0]);
        assert_eq!(m.col(2), &[3.0, 6.0]);
        let t = m.transpose();
        assert_eq!(t.shape(), (3, 2));
        assert_eq!(t.get(2, 1), 6.0);
        assert_eq!(t.row_norms_sq(), m.col_norms_sq());
        assert!(DenseMatrix::from_col_major(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::from_col_major(0, 2, vec![]).is_err());
    }

    #[test]
    fn matmul_and_gram() {
        let a = m22();
        let p = a.matmul(&a).unwrap();
        assert_eq!(p.row(0), vec![7.0, 10.0]);
        assert_eq!(p.row(1), vec![15.0, 22.0]);
        let g = a.gram();
        assert_eq!(g.row(0), vec![10.0, 14.0]);
        assert_eq!(g.row(1), vec![14.0, 20.0]);
    }

    #[test]
    fn zero_matrix_has_no_sampler() {
        let z = DenseMatrix::from_col_major(2, 2, vec![0.0; 4]).unwrap();
        let mut rng = RngStream::new(1);
        assert!(matches!(z.sample_row(&mut rng), Err(Error::ZeroWeights)));
    }
}
