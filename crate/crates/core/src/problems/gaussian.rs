use rand::seq::index;

use super::{FactorizedProblem, ProblemMeta};
use crate::dense::{householder_qr, norm, DenseMatrix};
use crate::error::{Error, Result};
use crate::sampling::RngStream;

/// Largest `m` accepted for the inconsistent construction, which needs a
/// Householder QR of the full `m × ℓ` factor `A`.
pub const INCONSISTENT_ROW_CEILING: usize = 2000;

/// Gaussian factors `A = randn(m, ℓ)`, `B = randn(ℓ, n)` and an `s`-sparse
/// ground truth with uniformly random support and standard-normal values.
///
/// Consistent: `b = A·B·x★`. Inconsistent: `b = b̂ + b̂⊥` where `b̂ = A·B·x★`
/// and `b̂⊥ = N·v·‖b̂‖/‖N·v‖`, with `N` an orthonormal basis of `null(Aᵀ)`
/// and `v ~ randn(m − ℓ)`. Since `b̂⊥ ⊥ ran(A·B)`, `x★` stays a
/// least-squares solution.
pub fn gen_gaussian(
    m: usize,
    l: usize,
    n: usize,
    s: usize,
    consistent: bool,
    rng: &mut RngStream,
) -> Result<FactorizedProblem> {
    if l == 0 || l > m.min(n) {
        return Err(Error::invalid(format!(
            "need 1 <= l <= min(m, n), got m={m}, l={l}, n={n}"
        )));
    }
    if s == 0 || s > n {
        return Err(Error::invalid(format!(
            "need 1 <= s <= n, got s={s}, n={n}"
        )));
    }
    let a = DenseMatrix::gaussian(m, l, rng)?;
    let b = DenseMatrix::gaussian(l, n, rng)?;
    let mut support = index::sample(rng, n, s).into_vec();
    support.sort_unstable();
    let mut x_star = vec![0.0; n];
    for i in support {
        let mut v = rng.standard_normal();
        while v == 0.0 {
            v = rng.standard_normal();
        }
        x_star[i] = v;
    }
    let meta = ProblemMeta {
        s: Some(s),
        seed: Some(rng.seed()),
        label: Some("gaussian".into()),
    };
    with_target(a, b, x_star, consistent, rng, meta)
}

/// Builds `b` around the given factors and ground truth (see
/// [`gen_gaussian`] for the inconsistent recipe).
pub fn with_target(
    a: DenseMatrix,
    b: DenseMatrix,
    x_star: Vec<f64>,
    consistent: bool,
    rng: &mut RngStream,
    meta: ProblemMeta,
) -> Result<FactorizedProblem> {
    let (m, l) = a.shape();
    let b_hat = a.matvec(&b.matvec(&x_star)?)?;
    let rhs = if consistent {
        b_hat
    } else {
        if m > INCONSISTENT_ROW_CEILING {
            return Err(Error::invalid(format!(
                "inconsistent construction is limited to m <= {INCONSISTENT_ROW_CEILING} \
                 (full QR of A); got m={m}, use desk scale"
            )));
        }
        if m == l {
            return Err(Error::invalid(
                "inconsistent construction needs m > l (null(Aᵀ) is trivial)",
            ));
        }
        let qr = householder_qr(&a)?;
        let v = rng.normal_vec(m - l);
        let nv = qr.null_combination(&v)?;
        let scale = norm(&b_hat) / norm(&nv);
        b_hat.iter().zip(&nv).map(|(h, p)| h + scale * p).collect()
    };
    FactorizedProblem::new(a, b, rhs, Some(x_star), consistent, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::sub;

    #[test]
    fn consistent_generator() {
        let mut rng = RngStream::new(7);
        let p = gen_gaussian(40, 10, 20, 4, true, &mut rng).unwrap();
        assert_eq!(p.dims(), (40, 10, 20));
        let xs = p.x_star().unwrap();
        assert_eq!(xs.iter().filter(|v| **v != 0.0).count(), 4);
        let r = norm(&sub(&p.apply(xs).unwrap(), p.rhs()));
        assert!(r <= 1e-10 * norm(p.rhs()));
        assert!(p.consistent());
    }

    #[test]
    fn inconsistent_generator() {
        let mut rng = RngStream::new(8);
        let p = gen_gaussian(40, 10, 20, 4, false, &mut rng).unwrap();
        let xs = p.x_star().unwrap();
        let b_hat = p.apply(xs).unwrap();
        let b_perp = sub(p.rhs(), &b_hat);
        assert!((norm(&b_perp) / norm(&b_hat) - 1.0).abs() < 1e-12);
        let at = p.a().matvec_t(&b_perp).unwrap();
        assert!(norm(&at) <= 1e-8 * p.a().frob() * norm(p.rhs()));
        assert!(!p.consistent());
    }

    #[test]
    fn deterministic_in_seed() {
        let p1 = gen_gaussian(20, 5, 10, 3, false, &mut RngStream::new(5)).unwrap();
        let p2 = gen_gaussian(20, 5, 10, 3, false, &mut RngStream::new(5)).unwrap();
        assert_eq!(p1.rhs(), p2.rhs());
        assert_eq!(p1.x_star(), p2.x_star());
    }

    #[test]
    fn argument_errors() {
        let mut rng = RngStream::new(9);
        assert!(gen_gaussian(10, 4, 8, 9, true, &mut rng).is_err());
        assert!(gen_gaussian(10, 4, 8, 0, true, &mut rng).is_err());
        assert!(gen_gaussian(10, 11, 20, 2, true, &mut rng).is_err());
        assert!(gen_gaussian(10, 9, 8, 2, true, &mut rng).is_err());
        assert!(gen_gaussian(6, 6, 8, 2, false, &mut rng).is_err());
        assert!(gen_gaussian(2001, 2, 4, 1, false, &mut rng).is_err());
    }
}
