use super::DenseMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_TOL: f64 = 1e-12;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// Iterates until the off-diagonal Frobenius norm drops below
/// `1e-12 · ‖S‖_F`.
pub fn symmetric_eigenvalues(s: &DenseMatrix) -> Result<Vec<f64>> {
    let n = s.rows();
    if s.cols() != n {
        return Err(Error::DimensionMismatch {
            op: "symmetric_eigenvalues",
            expected: n,
            got: s.cols(),
        });
    }
    let mut a = s.data().to_vec();
    let at = |a: &[f64], i: usize, j: usize| a[j * n + i];
    let target = OFF_TOL * s.frob();

    let off = |a: &[f64]| -> f64 {
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    acc += a[j * n + i] * a[j * n + i];
                }
            }
        }
        acc.sqrt()
    };

    let mut sweeps = 0;
    while off(&a) > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = at(&a, p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = at(&a, p, p);
                let aqq = at(&a, q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                // A ← Jᵀ A J on rows/cols p, q
                for k in 0..n {
                    let akp = a[p * n + k];
                    let akq = a[q * n + k];
                    a[p * n + k] = c * akp - sn * akq;
                    a[q * n + k] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[k * n + p];
                    let aqk = a[k * n + q];
                    a[k * n + p] = c * apk - sn * aqk;
                    a[k * n + q] = sn * apk + c * aqk;
                }
                a[q * n + p] = 0.0;
                a[p * n + q] = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| at(&a, i, i)).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    Ok(eig)
}

/// Smallest singular value of a full-column-rank matrix, as the square root
/// of the smallest eigenvalue of `MᵀM`.
pub fn sigma_min(m: &DenseMatrix) -> Result<f64> {
    let eig = symmetric_eigenvalues(&m.gram())?;
    Ok(eig[0].max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::norm_sq;
    use crate::sampling::RngStream;

    #[test]
    fn diagonal_cases() {
        let d = DenseMatrix::diag(&[3.0, 4.0]).unwrap();
        assert_eq!(sigma_min(&d).unwrap(), 3.0);
        assert_eq!(sigma_min(&DenseMatrix::identity(5).unwrap()).unwrap(), 1.0);
        let d = DenseMatrix::diag(&[-7.0, 2.5, 9.0, -0.5]).unwrap();
        assert!((sigma_min(&d).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn known_symmetric_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let s = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = symmetric_eigenvalues(&s).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn trace_preserved() {
        let mut rng = RngStream::new(31);
        let m = DenseMatrix::gaussian(15, 8, &mut rng).unwrap();
        let g = m.gram();
        let trace: f64 = (0..8).map(|i| g.get(i, i)).sum();
        let e = symmetric_eigenvalues(&g).unwrap();
        let sum: f64 = e.iter().sum();
        assert!((trace - sum).abs() < 1e-10 * trace);
        assert!(e.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn variational_bound() {
        let mut rng = RngStream::new(30);
        let m = DenseMatrix::gaussian(30, 10, &mut rng).unwrap();
        let smin = sigma_min(&m).unwrap();
        assert!(smin > 0.0);
        for _ in 0..100 {
            let mut v = rng.normal_vec(10);
            let nv = norm_sq(&v).sqrt();
            v.iter_mut().for_each(|x| *x /= nv);
            let mv = norm_sq(&m.matvec(&v).unwrap());
            assert!(smin * smin * norm_sq(&v) <= mv * (1.0 + 1e-12));
        }
    }
}
