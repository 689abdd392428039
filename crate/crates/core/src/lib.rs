//! A block-implicit solver for initial value problems built on Lagrange
//! differentiation matrices, plus the benchmark and analysis tooling around
//! it.
//!
//! The interval `[a, b]` is cut into blocks; on each block the ODE is
//! collocated at `N` equispaced interior nodes and all `N` unknowns are found
//! at once from `D·ξ - f(ξ) = -α·d`. The last value of a block becomes the
//! initial value of the next.
//!
//! ```
//! use scs::{march, IvpProblem, SolverConfig};
//!
//! let problem = IvpProblem::new((0.0, 1.0), vec![1.0], |x, _t| vec![-x[0]]).unwrap();
//! let traj = march(&problem, &SolverConfig::new(5, 4)).unwrap();
//! let err = (traj.final_value()[0] - (-1.0_f64).exp()).abs();
//! assert!(err < 1e-8);
//! ```

// `!(x > bound)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod diffmat;
pub mod error;
mod linalg;
pub mod problems;
pub mod solver;

pub use analysis::{
    empirical_order, error_report, rk4_reference, stability_probe, ErrorReport, OrderEstimate,
    Reference,
};
pub use diffmat::{scaled_interior, shifted_spectrum, DiffMatrices, NodeSet};
pub use error::{Error, Result};
pub use problems::{BenchmarkEntry, NormKind};
pub use solver::{
    fd_jacobian, march, solve_block_linear, solve_block_newton, BlockSolution, IvpProblem,
    JacobianMode, Partition, SolverConfig, Trajectory,
};
