use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::inf_norm;

/// Right-hand side `f(x, t)`.
pub type RhsFn = Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>;
/// `∂f_i/∂x_j` evaluated at `(x, t)`.
pub type JacobianFn = Arc<dyn Fn(&[f64], f64) -> DMatrix<f64> + Send + Sync>;
/// Any vector-valued function of time (exact solutions, forcing terms).
pub type TimeFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

const LINEAR_CHECK_SAMPLES: usize = 8;
const LINEAR_CHECK_TOL: f64 = 1e-12;

/// Marks `f(x, t) = A·x + φ(t)`.
#[derive(Clone)]
pub struct LinearPart {
    pub matrix: DMatrix<f64>,
    pub forcing: TimeFn,
}

impl fmt::Debug for LinearPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearPart")
            .field("matrix", &self.matrix)
            .finish_non_exhaustive()
    }
}

/// An initial value problem `x' = f(x, t)`, `x(a) = α` on `[a, b]`.
#[derive(Clone)]
pub struct IvpProblem {
    rhs: RhsFn,
    jacobian: Option<JacobianFn>,
    domain: (f64, f64),
    initial: Vec<f64>,
    exact: Option<TimeFn>,
    linear_part: Option<LinearPart>,
}

impl fmt::Debug for IvpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IvpProblem")
            .field("dimension", &self.dimension())
            .field("domain", &self.domain)
            .field("initial", &self.initial)
            .field("jacobian", &self.jacobian.is_some())
            .field("exact", &self.exact.is_some())
            .field("linear_part", &self.linear_part)
            .finish()
    }
}

impl IvpProblem {
    pub fn new<F>(domain: (f64, f64), initial: Vec<f64>, rhs: F) -> Result<Self>
    where
        F: Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static,
    {
        let (a, b) = domain;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInterval { a, b });
        }
        if initial.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        Ok(IvpProblem {
            rhs: Arc::new(rhs),
            jacobian: None,
            domain,
            initial,
            exact: None,
            linear_part: None,
        })
    }

    /// Affine problem `x' = A·x + φ(t)`; the rhs, Jacobian and linear part
    /// are all derived from `matrix` and `forcing`.
    pub fn affine<P>(
        domain: (f64, f64),
        initial: Vec<f64>,
        matrix: DMatrix<f64>,
        forcing: P,
    ) -> Result<Self>
    where
        P: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        let m = initial.len();
        if matrix.nrows() != m || matrix.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: matrix.nrows(),
            });
        }
        let forcing: TimeFn = Arc::new(forcing);
        let (a_rhs, phi_rhs) = (matrix.clone(), forcing.clone());
        let a_jac = matrix.clone();
        let problem = IvpProblem::new(domain, initial, move |x, t| {
            let ax = &a_rhs * DVector::from_column_slice(x);
            ax.iter().zip(phi_rhs(t)).map(|(u, v)| u + v).collect()
        })?
        .with_jacobian(move |_, _| a_jac.clone());
        Ok(IvpProblem {
            linear_part: Some(LinearPart { matrix, forcing }),
            ..problem
        })
    }

    pub fn with_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(&[f64], f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn with_exact<E>(mut self, exact: E) -> Self
    where
        E: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.exact = Some(Arc::new(exact));
        self
    }

    /// Declares `f(x, t) = A·x + φ(t)`, verified against the rhs on a few
    /// sampled points.
    pub fn with_linear_part<P>(mut self, matrix: DMatrix<f64>, forcing: P) -> Result<Self>
    where
        P: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        let m = self.dimension();
        if matrix.nrows() != m || matrix.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: matrix.nrows(),
            });
        }
        let part = LinearPart {
            matrix,
            forcing: Arc::new(forcing),
        };
        self.check_linear_part(&part)?;
        self.linear_part = Some(part);
        Ok(self)
    }

    /// Same problem with the linear structure forgotten, so the solver takes
    /// the Newton path.
    pub fn without_linear_part(mut self) -> Self {
        self.linear_part = None;
        self
    }

    pub fn with_initial(mut self, initial: Vec<f64>) -> Result<Self> {
        if initial.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: initial.len(),
            });
        }
        self.initial = initial;
        Ok(self)
    }

    fn check_linear_part(&self, part: &LinearPart) -> Result<()> {
        let (a, b) = self.domain;
        let m = self.dimension();
        for k in 0..LINEAR_CHECK_SAMPLES {
            let t = a + (b - a) * k as f64 / (LINEAR_CHECK_SAMPLES - 1) as f64;
            let x: Vec<f64> = (0..m)
                .map(|i| {
                    let sign = if (i + k) % 2 == 0 { 1.0 } else { -1.0 };
                    self.initial[i] + sign * 0.37 * (k + i + 1) as f64
                })
                .collect();
            let direct = self.rhs(&x, t);
            let ax = &part.matrix * DVector::from_column_slice(&x);
            let phi = (part.forcing)(t);
            let difference = (0..m)
                .map(|i| (direct[i] - ax[i] - phi[i]).abs())
                .fold(0.0, f64::max);
            if !(difference <= LINEAR_CHECK_TOL * inf_norm(&direct).max(1.0)) {
                return Err(Error::InconsistentLinearPart { t, difference });
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.initial.len()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn rhs(&self, x: &[f64], t: f64) -> Vec<f64> {
        (self.rhs)(x, t)
    }

    pub fn rhs_fn(&self) -> &RhsFn {
        &self.rhs
    }

    pub fn jacobian(&self) -> Option<&JacobianFn> {
        self.jacobian.as_ref()
    }

    pub fn exact(&self) -> Option<&TimeFn> {
        self.exact.as_ref()
    }

    pub fn exact_at(&self, t: f64) -> Option<Vec<f64>> {
        self.exact.as_ref().map(|e| e(t))
    }

    pub fn linear_part(&self) -> Option<&LinearPart> {
        self.linear_part.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_domain_and_dimension() {
        assert!(matches!(
            IvpProblem::new((1.0, 0.0), vec![1.0], |x, _| x.to_vec()),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(matches!(
            IvpProblem::new((0.0, 1.0), vec![], |x, _| x.to_vec()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn affine_builds_consistent_rhs() {
        let a = DMatrix::from_row_slice(2, 2, &[-0.1, -199.9, 0.0, -200.0]);
        let p =
            IvpProblem::affine((0.0, 1.0), vec![2.0, 1.0], a.clone(), |_| vec![0.0, 0.0]).unwrap();
        assert_eq!(p.rhs(&[1.0, 1.0], 0.0), vec![-200.0, -200.0]);
        assert_eq!(p.jacobian().unwrap()(&[0.0, 0.0], 0.0), a);
        assert!(p.linear_part().is_some());
        assert!(p.clone().without_linear_part().linear_part().is_none());
    }

    #[test]
    fn linear_part_is_checked() {
        let p = IvpProblem::new((0.0, 1.0), vec![1.0], |x, _| vec![-100.0 * x[0] + 10.0]).unwrap();
        let ok = p
            .clone()
            .with_linear_part(DMatrix::from_element(1, 1, -100.0), |_| vec![10.0]);
        assert!(ok.is_ok());
        let bad = p.with_linear_part(DMatrix::from_element(1, 1, -100.0), |_| vec![0.0]);
        assert!(matches!(bad, Err(Error::InconsistentLinearPart { .. })));
    }

    #[test]
    fn with_initial_checks_dimension() {
        let p = IvpProblem::new((0.0, 1.0), vec![1.0], |x, _| x.to_vec()).unwrap();
        assert!(p.clone().with_initial(vec![1.0, 2.0]).is_err());
        assert_eq!(p.with_initial(vec![2.0]).unwrap().initial(), &[2.0]);
    }
}
