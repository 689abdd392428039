use crate::error::{Error, Result};

/// How `[a, b]` is split into blocks.
#[derive(Debug, Clone, PartialEq)]
pub enum Partition {
    /// `M` blocks of equal width.
    Uniform(usize),
    /// Explicit block boundaries `a = a_0 < a_1 < ... < a_M = b`.
    Boundaries(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobianMode {
    /// Use the problem's analytic Jacobian; falls back to finite differences
    /// when none is supplied.
    #[default]
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Interior nodes per block (`N`); each block has `N + 1` nodes.
    pub points_per_block: usize,
    pub partition: Partition,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub jacobian_mode: JacobianMode,
    /// Base forward-difference step; column `j` uses
    /// `fd_epsilon · max(1, |x_j|)`.
    pub fd_epsilon: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            points_per_block: 5,
            partition: Partition::Uniform(1),
            newton_tol: 1e-12,
            newton_max_iter: 25,
            jacobian_mode: JacobianMode::Analytic,
            fd_epsilon: f64::EPSILON.sqrt(),
        }
    }
}

impl SolverConfig {
    pub fn new(points_per_block: usize, blocks: usize) -> Self {
        SolverConfig {
            points_per_block,
            partition: Partition::Uniform(blocks),
            ..Default::default()
        }
    }

    pub fn with_partition(mut self, partition: Partition) -> Self {
        self.partition = partition;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_block < 1 {
            return Err(Error::InvalidConfig(
                "points_per_block must be at least 1".into(),
            ));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::InvalidConfig("newton_tol must be positive".into()));
        }
        if self.newton_max_iter < 1 {
            return Err(Error::InvalidConfig(
                "newton_max_iter must be at least 1".into(),
            ));
        }
        if !(self.fd_epsilon > 0.0) {
            return Err(Error::InvalidConfig("fd_epsilon must be positive".into()));
        }
        match &self.partition {
            Partition::Uniform(0) => Err(Error::InvalidConfig(
                "block count must be at least 1".into(),
            )),
            Partition::Boundaries(b) if b.len() < 2 => Err(Error::InvalidConfig(
                "explicit partition needs at least two boundaries".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Block boundaries on `[a, b]`, with the endpoints pinned exactly.
    pub fn boundaries(&self, a: f64, b: f64) -> Result<Vec<f64>> {
        self.validate()?;
        match &self.partition {
            Partition::Uniform(m) => {
                let width = (b - a) / *m as f64;
                let mut bounds: Vec<f64> = (0..=*m).map(|n| a + n as f64 * width).collect();
                bounds[*m] = b;
                Ok(bounds)
            }
            Partition::Boundaries(given) => {
                let tol = 1e-12 * a.abs().max(b.abs()).max(1.0);
                let last = given.len() - 1;
                if (given[0] - a).abs() > tol || (given[last] - b).abs() > tol {
                    return Err(Error::InvalidConfig(format!(
                        "partition must run from {a} to {b}"
                    )));
                }
                if given.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidConfig(
                        "partition boundaries must be strictly increasing".into(),
                    ));
                }
                let mut bounds = given.clone();
                bounds[0] = a;
                bounds[last] = b;
                Ok(bounds)
            }
        }
    }

    pub fn block_count(&self) -> usize {
        match &self.partition {
            Partition::Uniform(m) => *m,
            Partition::Boundaries(b) => b.len().saturating_sub(1),
        }
    }
}
