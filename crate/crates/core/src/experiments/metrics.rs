use crate::dense::{norm, sub};
use crate::error::{Error, Result};
use crate::problems::FactorizedProblem;

/// `‖b − A·(B·x)‖ / ‖b‖`.
pub fn rel_residual_consistent(p: &FactorizedProblem, x: &[f64]) -> Result<f64> {
    let denom = norm(p.rhs());
    if denom == 0.0 {
        return Err(Error::invalid("relative residual undefined for b = 0"));
    }
    Ok(norm(&sub(p.rhs(), &p.apply(x)?)) / denom)
}

/// `‖BᵀAᵀ(b − A·B·x)‖ / ‖BᵀAᵀ·b‖`.
pub fn rel_residual_normal(p: &FactorizedProblem, x: &[f64]) -> Result<f64> {
    let denom = norm(&p.apply_t(p.rhs())?);
    if denom == 0.0 {
        return Err(Error::invalid(
            "normal-equations residual undefined for BᵀAᵀb = 0",
        ));
    }
    let r = sub(p.rhs(), &p.apply(x)?);
    Ok(norm(&p.apply_t(&r)?) / denom)
}

/// `‖x − x★‖ / ‖x★‖`.
pub fn rel_error(x: &[f64], x_star: &[f64]) -> Result<f64> {
    if x.len() != x_star.len() {
        return Err(Error::DimensionMismatch {
            op: "rel_error",
            expected: x_star.len(),
            got: x.len(),
        });
    }
    let denom = norm(x_star);
    if denom == 0.0 {
        return Err(Error::invalid("relative error undefined for x★ = 0"));
    }
    Ok(norm(&sub(x, x_star)) / denom)
}

/// The residual metric matching the problem's construction: plain residual
/// for consistent systems, normal-equations residual otherwise.
pub fn rel_residual(p: &FactorizedProblem, x: &[f64]) -> Result<f64> {
    if p.consistent() {
        rel_residual_consistent(p, x)
    } else {
        rel_residual_normal(p, x)
    }
}

/// Denominators computed once per run.
pub(crate) struct MetricContext<'a> {
    problem: &'a FactorizedProblem,
    residual_denom: f64,
    x_star_norm: Option<f64>,
}

impl<'a> MetricContext<'a> {
    pub(crate) fn new(problem: &'a FactorizedProblem) -> Result<Self> {
        let residual_denom = if problem.consistent() {
            norm(problem.rhs())
        } else {
            norm(&problem.apply_t(problem.rhs())?)
        };
        if residual_denom == 0.0 {
            return Err(Error::invalid(
                "relative residual undefined: right-hand side has zero norm",
            ));
        }
        let x_star_norm = match problem.x_star() {
            Some(xs) => {
                let n = norm(xs);
                if n == 0.0 {
                    return Err(Error::invalid("relative error undefined for x★ = 0"));
                }
                Some(n)
            }
            None => None,
        };
        Ok(Self {
            problem,
            residual_denom,
            x_star_norm,
        })
    }

    pub(crate) fn rel_residual(&self, x: &[f64]) -> Result<f64> {
        let p = self.problem;
        let r = sub(p.rhs(), &p.apply(x)?);
        let num = if p.consistent() {
            norm(&r)
        } else {
            norm(&p.apply_t(&r)?)
        };
        Ok(num / self.residual_denom)
    }

    pub(crate) fn rel_error(&self, x: &[f64]) -> Option<f64> {
        let xs = self.problem.x_star()?;
        Some(norm(&sub(x, xs)) / self.x_star_norm?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::least_squares_solve;
    use crate::problems::gen_gaussian;
    use crate::sampling::RngStream;

    #[test]
    fn consistent_residual() {
        let p = gen_gaussian(20, 5, 10, 3, true, &mut RngStream::new(80)).unwrap();
        let xs = p.x_star().unwrap();
        assert!(rel_residual_consistent(&p, xs).unwrap() <= 1e-10);
        assert_eq!(rel_residual_consistent(&p, &[0.0; 10]).unwrap(), 1.0);
        let x = RngStream::new(81).normal_vec(10);
        let via_c = norm(&sub(p.rhs(), &p.product().matvec(&x).unwrap())) / norm(p.rhs());
        assert!((via_c - rel_residual_consistent(&p, &x).unwrap()).abs() < 1e-12);
        assert!(rel_residual_normal(&p, xs).unwrap() < 1e-10);
    }

    #[test]
    fn normal_residual_at_least_squares_point() {
        let p = gen_gaussian(30, 5, 12, 3, false, &mut RngStream::new(82)).unwrap();
        assert_eq!(rel_residual_normal(&p, &[0.0; 12]).unwrap(), 1.0);
        // y = A†b, then any x with B·x = y is a least-squares point
        let y = least_squares_solve(p.a(), p.rhs()).unwrap();
        let x = crate::dense::min_norm_solve(p.b(), &y).unwrap();
        assert!(rel_residual_normal(&p, &x).unwrap() <= 1e-8);
        assert!(rel_residual_consistent(&p, &x).unwrap() > 0.5);
    }

    #[test]
    fn relative_error() {
        let xs = [1.0, -2.0, 0.0];
        assert_eq!(rel_error(&xs, &xs).unwrap(), 0.0);
        assert_eq!(rel_error(&[0.0; 3], &xs).unwrap(), 1.0);
        assert_eq!(rel_error(&[2.0, -4.0, 0.0], &xs).unwrap(), 1.0);
        assert!(rel_error(&xs, &[0.0; 3]).is_err());
    }
}
