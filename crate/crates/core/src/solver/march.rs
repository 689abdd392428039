use super::block::{solve_block_linear, solve_block_newton};
use super::config::SolverConfig;
use super::problem::IvpProblem;
use crate::diffmat::{DiffMatrices, NodeSet};
use crate::error::{Error, Result};

/// Solution values at every interior node of every block.
///
/// The initial point `(a, α)` is not stored as an entry; it is the implicit
/// anchor of the first block and is still reachable through [`value_at`].
///
/// [`value_at`]: Trajectory::value_at
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    block_index: Vec<usize>,
    block_iterations: Vec<usize>,
    block_residuals: Vec<f64>,
    problem: IvpProblem,
    config: Option<SolverConfig>,
}

impl Trajectory {
    pub(crate) fn from_parts(
        problem: IvpProblem,
        config: Option<SolverConfig>,
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
        block_index: Vec<usize>,
    ) -> Self {
        Trajectory {
            times,
            values,
            block_index,
            block_iterations: Vec::new(),
            block_residuals: Vec::new(),
            problem,
            config,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn block_index(&self) -> &[usize] {
        &self.block_index
    }

    /// Newton iterations per block (zeros for the linear path). Empty for
    /// trajectories not produced by [`march`].
    pub fn block_iterations(&self) -> &[usize] {
        &self.block_iterations
    }

    pub fn block_residuals(&self) -> &[f64] {
        &self.block_residuals
    }

    pub fn problem(&self) -> &IvpProblem {
        &self.problem
    }

    /// Configuration used by [`march`]; `None` for reference trajectories.
    pub fn config(&self) -> Option<&SolverConfig> {
        self.config.as_ref()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_value(&self) -> &[f64] {
        self.values
            .last()
            .map(Vec::as_slice)
            .unwrap_or_else(|| self.problem.initial())
    }

    /// State at the node whose time is within `tol` of `t`, including the
    /// initial anchor.
    pub fn value_at(&self, t: f64, tol: f64) -> Option<&[f64]> {
        let (a, _) = self.problem.domain();
        if (t - a).abs() <= tol {
            return Some(self.problem.initial());
        }
        let idx = self.times.partition_point(|&s| s < t);
        [idx.checked_sub(1), Some(idx)]
            .into_iter()
            .flatten()
            .filter(|&i| i < self.times.len())
            .find(|&i| (self.times[i] - t).abs() <= tol)
            .map(|i| self.values[i].as_slice())
    }

    /// `max_{i,c} |self[i][c] - other[i][c]|` over entries both trajectories
    /// share (node-by-node, so both must come from the same grid).
    pub fn max_abs_difference(&self, other: &Trajectory) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(u, v)| u.iter().zip(v).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

/// Marches the block method across `[a, b]`.
///
/// Each block gets `N + 1` equispaced nodes whose first node is the previous
/// block's last; that shared value is the block's initial condition. Problems
/// with a declared linear part are solved directly, everything else by
/// Newton iteration.
pub fn march(problem: &IvpProblem, config: &SolverConfig) -> Result<Trajectory> {
    let (a, b) = problem.domain();
    let bounds = config.boundaries(a, b)?;
    let n = config.points_per_block;
    let blocks = bounds.len() - 1;

    let mut times = Vec::with_capacity(blocks * n);
    let mut values = Vec::with_capacity(blocks * n);
    let mut block_index = Vec::with_capacity(blocks * n);
    let mut block_iterations = Vec::with_capacity(blocks);
    let mut block_residuals = Vec::with_capacity(blocks);
    let mut alpha = problem.initial().to_vec();

    for (index, w) in bounds.windows(2).enumerate() {
        let nodes = NodeSet::equispaced(w[0], w[1], n + 1).map_err(|e| e.in_block(index))?;
        let matrices = DiffMatrices::build(&nodes);
        let solution = match problem.linear_part() {
            Some(lin) => solve_block_linear(&matrices, &lin.matrix, lin.forcing.as_ref(), &alpha),
            None => solve_block_newton(&matrices, problem, &alpha, config),
        }
        .map_err(|e| e.in_block(index))?;

        if solution.xi.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: w[1] }.in_block(index));
        }

        alpha.clone_from(&solution.xi[n - 1]);
        times.extend_from_slice(&nodes.nodes()[1..]);
        block_index.extend(std::iter::repeat_n(index, n));
        block_iterations.push(solution.iterations);
        block_residuals.push(solution.residual_norm);
        values.extend(solution.xi);
    }

    Ok(Trajectory {
        times,
        values,
        block_index,
        block_iterations,
        block_residuals,
        problem: problem.clone(),
        config: Some(config.clone()),
    })
}
