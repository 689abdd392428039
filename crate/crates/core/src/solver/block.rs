//! Solving one block: `D·ξ - f(ξ) = -α·d` on the interior nodes.
//!
//! Vector problems use node-major stacking, `ξ = (ξ_1ᵀ, ..., ξ_Nᵀ)ᵀ`, so the
//! block operator is `D ⊗ I_m` and per-node Jacobians sit on its block
//! diagonal.

use nalgebra::{DMatrix, DVector};

use super::config::{JacobianMode, SolverConfig};
use super::problem::IvpProblem;
use crate::diffmat::DiffMatrices;
use crate::error::{Error, Result};
use crate::linalg::{inf_norm, kron_identity, solve_dense};

/// Values at the interior nodes `t_1..t_N` of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSolution {
    /// `xi[j]` is the state at `t_{j+1}`.
    pub xi: Vec<Vec<f64>>,
    /// Newton iterations used; zero on the direct linear path.
    pub iterations: usize,
    /// `‖D·ξ - f(ξ) + α·d‖_∞` at the returned ξ.
    pub residual_norm: f64,
}

impl BlockSolution {
    /// State at the block's right endpoint, which seeds the next block.
    pub fn last(&self) -> &[f64] {
        &self.xi[self.xi.len() - 1]
    }
}

/// Direct solve of `(D ⊗ I - I ⊗ A)·ξ = -(d ⊗ α) + φ` for `f = A·x + φ(t)`.
pub fn solve_block_linear(
    matrices: &DiffMatrices,
    matrix: &DMatrix<f64>,
    forcing: &dyn Fn(f64) -> Vec<f64>,
    alpha: &[f64],
) -> Result<BlockSolution> {
    let m = alpha.len();
    if matrix.nrows() != m || matrix.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: matrix.nrows(),
        });
    }
    let n = matrices.order();
    let times = &matrices.nodes().nodes()[1..];
    let d = matrices.coupling();

    let mut system = kron_identity(matrices.interior(), m);
    for j in 0..n {
        let mut block = system.view_mut((j * m, j * m), (m, m));
        block -= matrix;
    }

    let mut rhs = DVector::zeros(n * m);
    for (j, &t) in times.iter().enumerate() {
        let phi = forcing(t);
        for i in 0..m {
            rhs[j * m + i] = -d[j] * alpha[i] + phi[i];
        }
    }

    let solution = solve_dense(system.clone(), &rhs)?;
    let residual_norm = (&system * &solution - &rhs).amax();
    Ok(BlockSolution {
        xi: unstack(&solution, m),
        iterations: 0,
        residual_norm,
    })
}

/// Forward-difference Jacobian with a fixed step `eps` for every column.
pub fn fd_jacobian<F>(rhs: &F, x: &[f64], t: f64, eps: f64) -> DMatrix<f64>
where
    F: Fn(&[f64], f64) -> Vec<f64> + ?Sized,
{
    fd_jacobian_with_steps(rhs, x, t, |_| eps)
}

fn fd_jacobian_with_steps<F, S>(rhs: &F, x: &[f64], t: f64, step: S) -> DMatrix<f64>
where
    F: Fn(&[f64], f64) -> Vec<f64> + ?Sized,
    S: Fn(usize) -> f64,
{
    let m = x.len();
    let base = rhs(x, t);
    let mut jac = DMatrix::zeros(base.len(), m);
    let mut shifted = x.to_vec();
    for j in 0..m {
        let eps = step(j);
        shifted[j] = x[j] + eps;
        let perturbed = rhs(&shifted, t);
        for i in 0..base.len() {
            jac[(i, j)] = (perturbed[i] - base[i]) / eps;
        }
        shifted[j] = x[j];
    }
    jac
}

fn node_jacobian(problem: &IvpProblem, config: &SolverConfig, x: &[f64], t: f64) -> DMatrix<f64> {
    match (config.jacobian_mode, problem.jacobian()) {
        (JacobianMode::Analytic, Some(jac)) => jac(x, t),
        _ => {
            let base = config.fd_epsilon;
            fd_jacobian_with_steps(problem.rhs_fn().as_ref(), x, t, |j| {
                base * x[j].abs().max(1.0)
            })
        }
    }
}

/// Newton iteration on the block system, starting from `ξ^(0) = α` at every
/// node.
///
/// Each step solves `(D ⊗ I - Λ)·η = -(D·ξ - f(ξ) + α·d)` with `Λ` the block
/// diagonal of per-node Jacobians, and stops once
/// `‖η‖_∞ ≤ newton_tol · max(1, ‖ξ‖_∞)`.
pub fn solve_block_newton(
    matrices: &DiffMatrices,
    problem: &IvpProblem,
    alpha: &[f64],
    config: &SolverConfig,
) -> Result<BlockSolution> {
    let m = problem.dimension();
    if alpha.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: alpha.len(),
        });
    }
    let n = matrices.order();
    let times = &matrices.nodes().nodes()[1..];
    let operator = kron_identity(matrices.interior(), m);
    let anchor = coupling_term(matrices, alpha);

    let mut xi = DVector::from_iterator(n * m, (0..n).flat_map(|_| alpha.iter().copied()));
    let mut update_norm = f64::INFINITY;

    for iteration in 1..=config.newton_max_iter {
        let f = eval_stacked(problem, times, &xi, m);
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NewtonDivergence {
                iterations: iteration - 1,
                update_norm,
            });
        }
        let residual = &operator * &xi - &f + &anchor;

        let mut system = operator.clone();
        for (j, &t) in times.iter().enumerate() {
            let jac = node_jacobian(problem, config, xi.rows(j * m, m).as_slice(), t);
            let mut block = system.view_mut((j * m, j * m), (m, m));
            block -= &jac;
        }
        if system.iter().any(|v| !v.is_finite()) {
            return Err(Error::NewtonDivergence {
                iterations: iteration - 1,
                update_norm,
            });
        }

        let eta = solve_dense(system, &(-residual))?;
        let scale = xi.amax().max(1.0);
        xi += &eta;
        update_norm = eta.amax();
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::NewtonDivergence {
                iterations: iteration,
                update_norm,
            });
        }
        if update_norm <= config.newton_tol * scale {
            let f = eval_stacked(problem, times, &xi, m);
            let residual_norm = (&operator * &xi - &f + &anchor).amax();
            return Ok(BlockSolution {
                xi: unstack(&xi, m),
                iterations: iteration,
                residual_norm,
            });
        }
    }

    Err(Error::NewtonDivergence {
        iterations: config.newton_max_iter,
        update_norm,
    })
}

/// `‖D·ξ - f(ξ) + α·d‖_∞` for an arbitrary candidate ξ.
pub fn block_residual(
    matrices: &DiffMatrices,
    problem: &IvpProblem,
    alpha: &[f64],
    xi: &[Vec<f64>],
) -> f64 {
    let m = problem.dimension();
    let times = &matrices.nodes().nodes()[1..];
    let stacked = DVector::from_iterator(xi.len() * m, xi.iter().flatten().copied());
    let f = eval_stacked(problem, times, &stacked, m);
    let r = kron_identity(matrices.interior(), m) * &stacked - f + coupling_term(matrices, alpha);
    inf_norm(r.as_slice())
}

fn coupling_term(matrices: &DiffMatrices, alpha: &[f64]) -> DVector<f64> {
    let m = alpha.len();
    let d = matrices.coupling();
    DVector::from_fn(d.len() * m, |r, _| d[r / m] * alpha[r % m])
}

fn eval_stacked(problem: &IvpProblem, times: &[f64], xi: &DVector<f64>, m: usize) -> DVector<f64> {
    let mut out = DVector::zeros(times.len() * m);
    for (j, &t) in times.iter().enumerate() {
        let f = problem.rhs(xi.rows(j * m, m).as_slice(), t);
        out.rows_mut(j * m, m).copy_from_slice(&f);
    }
    out
}

fn unstack(v: &DVector<f64>, m: usize) -> Vec<Vec<f64>> {
    v.as_slice().chunks(m).map(<[f64]>::to_vec).collect()
}
