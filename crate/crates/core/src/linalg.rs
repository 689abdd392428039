use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Infinity norm (max absolute row sum).
pub(crate) fn matrix_inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `matrix · x = rhs` by LU with partial pivoting, rejecting systems
/// whose smallest pivot falls below `1e3 · eps · ‖matrix‖_∞`.
pub(crate) fn solve_dense(matrix: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let threshold = 1e3 * f64::EPSILON * matrix_inf_norm(&matrix);
    let lu = matrix.lu();
    let pivot = lu
        .u()
        .diagonal()
        .iter()
        .fold(f64::INFINITY, |m, x| m.min(x.abs()));
    if !(pivot > threshold) {
        return Err(Error::SingularSystem { pivot, threshold });
    }
    lu.solve(rhs)
        .ok_or(Error::SingularSystem { pivot, threshold })
}

/// `D ⊗ I_m` in node-major ordering: unknown `(j, i)` lives at `j·m + i`.
pub(crate) fn kron_identity(d: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    let n = d.nrows();
    let mut out = DMatrix::zeros(n * m, n * m);
    for j in 0..n {
        for k in 0..n {
            let value = d[(j, k)];
            if value != 0.0 {
                for i in 0..m {
                    out[(j * m + i, k * m + i)] = value;
                }
            }
        }
    }
    out
}
