//! Block-implicit marching solver.

mod block;
mod config;
mod march;
mod problem;

pub use block::{
    block_residual, fd_jacobian, solve_block_linear, solve_block_newton, BlockSolution,
};
pub use config::{JacobianMode, Partition, SolverConfig};
pub use march::{march, Trajectory};
pub use problem::{IvpProblem, JacobianFn, LinearPart, RhsFn, TimeFn};
