//! Lagrange differentiation matrices on arbitrary increasing node sets.
//!
//! For nodes `t_0 < t_1 < ... < t_N` and `P(t) = Π (t - t_k)`, the matrix
//!
//! ```text
//! full[j][j] = Σ_{l≠j} 1 / (t_j - t_l)
//! full[j][k] = P'(t_j) / ((t_j - t_k) P'(t_k))     (j ≠ k)
//! ```
//!
//! maps nodal values of a function to nodal values of its derivative, and is
//! exact on polynomials of degree at most `N`. The block solver only needs the
//! rows `1..=N`: the interior `N×N` submatrix `D` acts on the unknowns and the
//! first column (the coupling vector `d`) carries the initial value.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gaps below this many machine epsilons (scaled by the largest |t|) are
/// treated as coincident nodes.
const MIN_GAP_EPS: f64 = 1e3;

/// Relative tolerance used when deciding whether gaps are uniform.
const EQUISPACED_RTOL: f64 = 1e-12;

/// Ordered collocation nodes of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    nodes: Vec<f64>,
    h: f64,
    is_equispaced: bool,
}

impl NodeSet {
    /// Validates an arbitrary strictly increasing node sequence.
    ///
    /// The equispaced flag is set when every gap matches the largest one to
    /// within a relative tolerance of `1e-12`.
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        let h = validate(&nodes)?;
        let is_equispaced = nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= EQUISPACED_RTOL * h);
        Ok(NodeSet {
            nodes,
            h,
            is_equispaced,
        })
    }

    /// `count` uniformly spaced nodes from `a` to `b`, both included.
    pub fn equispaced(a: f64, b: f64, count: usize) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInterval { a, b });
        }
        if count < 2 {
            return Err(Error::InvalidCount(count));
        }
        let intervals = (count - 1) as f64;
        let step = (b - a) / intervals;
        let mut nodes: Vec<f64> = (0..count).map(|i| a + i as f64 * step).collect();
        // pin the right endpoint so adjacent blocks share it bit-for-bit
        nodes[count - 1] = b;
        validate(&nodes)?;
        Ok(NodeSet {
            nodes,
            h: step,
            is_equispaced: true,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Largest adjacent gap.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn is_equispaced(&self) -> bool {
        self.is_equispaced
    }

    /// Number of unknowns per block, i.e. one less than the node count.
    pub fn order(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }
}

fn validate(nodes: &[f64]) -> Result<f64> {
    if nodes.len() < 2 {
        return Err(Error::InvalidCount(nodes.len()));
    }
    if let Some(index) = nodes.iter().position(|t| !t.is_finite()) {
        return Err(Error::NotIncreasing { index });
    }
    let scale = nodes.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    let min_gap = MIN_GAP_EPS * f64::EPSILON * scale;
    let mut h = 0.0_f64;
    for (index, w) in nodes.windows(2).enumerate() {
        let gap = w[1] - w[0];
        if gap < 0.0 {
            return Err(Error::NotIncreasing { index });
        }
        if gap <= min_gap {
            return Err(Error::DuplicateNode { index });
        }
        h = h.max(gap);
    }
    Ok(h)
}

/// Full differentiation matrix together with its interior/coupling split.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMatrices {
    full: DMatrix<f64>,
    interior: DMatrix<f64>,
    coupling: DVector<f64>,
    nodes: NodeSet,
}

impl DiffMatrices {
    /// Builds the differentiation matrix on `nodes`.
    pub fn build(nodes: &NodeSet) -> Self {
        let t = nodes.nodes();
        let size = t.len();
        let n = size - 1;

        // P'(t_j) = Π_{l≠j} (t_j - t_l)
        let dp: Vec<f64> = (0..size)
            .map(|j| (0..size).filter(|&l| l != j).map(|l| t[j] - t[l]).product())
            .collect();

        let full = DMatrix::from_fn(size, size, |j, k| {
            if j == k {
                (0..size)
                    .filter(|&l| l != j)
                    .map(|l| 1.0 / (t[j] - t[l]))
                    .sum()
            } else {
                dp[j] / ((t[j] - t[k]) * dp[k])
            }
        });

        let interior = full.view((1, 1), (n, n)).clone_owned();
        let coupling = full.view((1, 0), (n, 1)).column(0).clone_owned();

        DiffMatrices {
            full,
            interior,
            coupling,
            nodes: nodes.clone(),
        }
    }

    /// The `(N+1)×(N+1)` matrix acting on all nodes.
    pub fn full(&self) -> &DMatrix<f64> {
        &self.full
    }

    /// Rows and columns `1..=N` of the full matrix.
    pub fn interior(&self) -> &DMatrix<f64> {
        &self.interior
    }

    /// Entries `full[j][0]` for `j = 1..=N`.
    pub fn coupling(&self) -> &DVector<f64> {
        &self.coupling
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    /// Number of interior nodes `N`.
    pub fn order(&self) -> usize {
        self.interior.nrows()
    }

    /// Applies the full matrix to nodal values.
    pub fn differentiate(&self, values: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(values);
        (&self.full * v).iter().copied().collect()
    }
}

/// `h·D` for an equispaced node set; its entries depend only on `N`.
pub fn scaled_interior(nodes: &NodeSet) -> Result<DMatrix<f64>> {
    if !nodes.is_equispaced() {
        return Err(Error::NotEquispaced);
    }
    Ok(DiffMatrices::build(nodes).interior() * nodes.h())
}

/// Eigenvalues of `(T - t_0 I)·D`, with `T = diag(t_1, ..., t_N)`, sorted by
/// real part.
///
/// For any increasing node set these are the integers `1..=N`, which is what
/// makes `D` invertible.
pub fn shifted_spectrum(matrices: &DiffMatrices) -> Vec<Complex64> {
    let t = matrices.nodes().nodes();
    let mut product = matrices.interior().clone();
    for (j, mut row) in product.row_iter_mut().enumerate() {
        row *= t[j + 1] - t[0];
    }
    let mut eigenvalues: Vec<Complex64> = product.complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    eigenvalues
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_matrix_close(actual: &DMatrix<f64>, expected: &[&[f64]], tol: f64) {
        assert_eq!(actual.nrows(), expected.len());
        for (j, row) in expected.iter().enumerate() {
            assert_eq!(actual.ncols(), row.len());
            for (k, &value) in row.iter().enumerate() {
                assert!(
                    (actual[(j, k)] - value).abs() <= tol,
                    "entry ({j},{k}): {} vs {value}",
                    actual[(j, k)]
                );
            }
        }
    }

    /// Derivative weights at `t[row]` from the transposed Vandermonde system
    /// `Σ_k w_k t_k^m = m t_row^{m-1}`, solved independently of the product
    /// formula.
    fn vandermonde_weights(t: &[f64], row: usize) -> Vec<f64> {
        let size = t.len();
        let shifted: Vec<f64> = t.iter().map(|x| x - t[row]).collect();
        let v = DMatrix::from_fn(size, size, |m, k| shifted[k].powi(m as i32));
        let mut rhs = DVector::zeros(size);
        if size > 1 {
            rhs[1] = 1.0;
        }
        v.lu().solve(&rhs).unwrap().iter().copied().collect()
    }

    #[test]
    fn equispaced_two_endpoints() {
        let ns = NodeSet::equispaced(0.0, 1.0, 2).unwrap();
        assert_eq!(ns.nodes(), &[0.0, 1.0]);
        assert!(ns.is_equispaced());
        assert_eq!(ns.h(), 1.0);
    }

    #[test]
    fn equispaced_table_block() {
        let ns = NodeSet::equispaced(0.0, 0.02, 6).unwrap();
        let expected = [0.0, 0.004, 0.008, 0.012, 0.016, 0.02];
        for (a, b) in ns.nodes().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(ns.last(), 0.02);
        assert!((ns.h() - 0.004).abs() < 1e-15);
    }

    #[test]
    fn equispaced_uniform_division() {
        let ns = NodeSet::equispaced(0.0, 2.0, 3).unwrap();
        assert_eq!(ns.nodes(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn equispaced_rejects_bad_input() {
        assert_eq!(
            NodeSet::equispaced(1.0, 1.0, 3),
            Err(Error::InvalidInterval { a: 1.0, b: 1.0 })
        );
        assert_eq!(
            NodeSet::equispaced(2.0, 1.0, 3),
            Err(Error::InvalidInterval { a: 2.0, b: 1.0 })
        );
        assert_eq!(
            NodeSet::equispaced(0.0, 1.0, 1),
            Err(Error::InvalidCount(1))
        );
    }

    #[test]
    fn node_set_validation() {
        assert_eq!(NodeSet::new(vec![0.0]), Err(Error::InvalidCount(1)));
        assert_eq!(
            NodeSet::new(vec![0.0, 2.0, 1.0]),
            Err(Error::NotIncreasing { index: 1 })
        );
        assert_eq!(
            NodeSet::new(vec![0.0, 1.0, 1.0]),
            Err(Error::DuplicateNode { index: 1 })
        );
        assert_eq!(
            NodeSet::new(vec![1.0, 1.0 + 1e-14]),
            Err(Error::DuplicateNode { index: 0 })
        );
        assert!(NodeSet::new(vec![0.0, f64::NAN]).is_err());

        let irregular = NodeSet::new(vec![0.0, 0.1, 0.5]).unwrap();
        assert!(!irregular.is_equispaced());
        assert!((irregular.h() - 0.4).abs() < 1e-15);
        assert!(NodeSet::new(vec![0.0, 0.5, 1.0]).unwrap().is_equispaced());
    }

    #[test]
    fn two_point_matrix() {
        let dm = DiffMatrices::build(&NodeSet::new(vec![0.0, 1.0]).unwrap());
        assert_matrix_close(dm.full(), &[&[-1.0, 1.0], &[-1.0, 1.0]], 1e-15);
    }

    #[test]
    fn three_point_matrix_and_blocks() {
        let dm = DiffMatrices::build(&NodeSet::new(vec![0.0, 1.0, 2.0]).unwrap());
        assert_matrix_close(
            dm.full(),
            &[&[-1.5, 2.0, -0.5], &[-0.5, 0.0, 0.5], &[0.5, -2.0, 1.5]],
            1e-15,
        );
        assert_matrix_close(dm.interior(), &[&[0.0, 0.5], &[-2.0, 1.5]], 1e-15);
        assert_eq!(dm.coupling().as_slice(), &[-0.5, 0.5]);
        assert_eq!(dm.order(), 2);
    }

    #[test]
    fn matches_vandermonde_oracle() {
        let t = [-0.9, -0.3, 0.05, 0.4, 0.95];
        let dm = DiffMatrices::build(&NodeSet::new(t.to_vec()).unwrap());
        for row in 0..t.len() {
            let w = vandermonde_weights(&t, row);
            for (k, weight) in w.iter().enumerate() {
                assert!((dm.full()[(row, k)] - weight).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sub_blocks_are_exact_copies() {
        let ns = NodeSet::new(vec![0.0, 0.3, 0.7, 1.6]).unwrap();
        let dm = DiffMatrices::build(&ns);
        for j in 0..3 {
            assert_eq!(dm.coupling()[j], dm.full()[(j + 1, 0)]);
            for k in 0..3 {
                assert_eq!(dm.interior()[(j, k)], dm.full()[(j + 1, k + 1)]);
            }
        }
    }

    #[test]
    fn differentiates_monomials() {
        let ns = NodeSet::equispaced(-1.0, 1.0, 5).unwrap();
        let dm = DiffMatrices::build(&ns);
        for m in 0..=4 {
            let values: Vec<f64> = ns.nodes().iter().map(|t| t.powi(m)).collect();
            let derivative = dm.differentiate(&values);
            for (t, d) in ns.nodes().iter().zip(derivative) {
                let expected = if m == 0 {
                    0.0
                } else {
                    m as f64 * t.powi(m - 1)
                };
                assert!((d - expected).abs() < 1e-12, "m={m} t={t}");
            }
        }
    }

    #[test]
    fn scaled_interior_independent_of_h() {
        let expected: &[&[f64]] = &[&[0.0, 0.5], &[-2.0, 1.5]];
        let unit = scaled_interior(&NodeSet::equispaced(0.0, 2.0, 3).unwrap()).unwrap();
        assert_matrix_close(&unit, expected, 1e-15);
        let half = scaled_interior(&NodeSet::equispaced(0.0, 1.0, 3).unwrap()).unwrap();
        assert_matrix_close(&half, expected, 1e-15);

        for a in [0.0, 3.5, -7.0] {
            let h = 0.37;
            let delta = scaled_interior(&NodeSet::equispaced(a, a + h, 2).unwrap()).unwrap();
            assert!((delta[(0, 0)] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_interior_requires_uniform_nodes() {
        let ns = NodeSet::new(vec![0.0, 0.1, 0.5]).unwrap();
        assert_eq!(scaled_interior(&ns), Err(Error::NotEquispaced));
    }

    #[test]
    fn spectrum_small_cases() {
        let dm = DiffMatrices::build(&NodeSet::new(vec![0.0, 1.0, 2.0]).unwrap());
        let spectrum = shifted_spectrum(&dm);
        assert_eq!(spectrum.len(), 2);
        assert!((spectrum[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((spectrum[1] - Complex64::new(2.0, 0.0)).norm() < 1e-12);

        let dm = DiffMatrices::build(&NodeSet::new(vec![0.0, 1.0]).unwrap());
        let spectrum = shifted_spectrum(&dm);
        assert_eq!(spectrum.len(), 1);
        assert!((spectrum[0] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn spectrum_irregular_five_nodes() {
        let dm = DiffMatrices::build(&NodeSet::new(vec![-0.8, -0.55, 0.1, 0.2, 0.9]).unwrap());
        let spectrum = shifted_spectrum(&dm);
        for (i, lambda) in spectrum.iter().enumerate() {
            assert!((lambda - Complex64::new((i + 1) as f64, 0.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn reduced_node_identity() {
        // D (T - t0) = (T - t0) D_r + I; on {0, 1, 2} both sides are [[0, 1], [-2, 3]]
        // while (T - t0) D is [[0, 0.5], [-4, 3]].
        let t = [0.0, 1.0, 2.0];
        let dm = DiffMatrices::build(&NodeSet::new(t.to_vec()).unwrap());
        let shift = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        assert_matrix_close(
            &(dm.interior() * &shift),
            &[&[0.0, 1.0], &[-2.0, 3.0]],
            1e-14,
        );
        assert_matrix_close(
            &(&shift * dm.interior()),
            &[&[0.0, 0.5], &[-4.0, 3.0]],
            1e-14,
        );

        let t = [-0.8, -0.55, 0.1, 0.2, 0.9];
        let dm = DiffMatrices::build(&NodeSet::new(t.to_vec()).unwrap());
        let reduced = DiffMatrices::build(&NodeSet::new(t[1..].to_vec()).unwrap());
        let shift = DMatrix::from_fn(4, 4, |j, k| if j == k { t[j + 1] - t[0] } else { 0.0 });
        let residual = dm.interior() * &shift - &shift * reduced.full() - DMatrix::identity(4, 4);
        assert!(residual.amax() < 1e-12);
    }
}
