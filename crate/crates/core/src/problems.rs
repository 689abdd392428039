//! The five benchmark problems and the grids their errors are tabulated on.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::solver::IvpProblem;

const NAMES: [&str; 5] = ["example1", "example2", "example3", "example4", "example5"];

/// How pointwise errors are aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// Square root of the sum of squares over reporting times (scalar problems).
    Euclidean,
    /// Square root of the sum of squares over times × components.
    Frobenius,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::Euclidean => "euclidean",
            NormKind::Frobenius => "frobenius",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkEntry {
    pub name: &'static str,
    pub problem: IvpProblem,
    /// Times at which errors are reported; they coincide with block ends of
    /// the default partition.
    pub reporting_times: Vec<f64>,
    /// Published error norm of the block method, where one was given.
    pub published_norm: Option<f64>,
    pub norm_kind: NormKind,
    /// Uniform block count whose boundaries hit every reporting time.
    pub default_blocks: usize,
    /// RK4 steps per unit time when an oracle reference is needed.
    pub oracle_steps: u64,
}

/// Benchmark names in registry order.
pub fn list() -> &'static [&'static str] {
    &NAMES
}

pub fn get(name: &str) -> Result<BenchmarkEntry> {
    match name {
        "example1" => Ok(example1()),
        "example2" => Ok(example2()),
        "example3" => Ok(example3()),
        "example4" => Ok(example4()),
        "example5" => Ok(example5()),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

fn grid(step: f64, from: usize, to: usize) -> Vec<f64> {
    (from..=to).map(|k| k as f64 * step).collect()
}

fn scalar(value: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, value)
}

/// Stiff decay: `x' = -100x + 10`, `x(0) = 1` on `[0, 0.2]`.
fn example1() -> BenchmarkEntry {
    let problem = IvpProblem::affine((0.0, 0.2), vec![1.0], scalar(-100.0), |_| vec![10.0])
        .expect("valid problem")
        .with_exact(|t| vec![(1.0 + 9.0 * (-100.0 * t).exp()) / 10.0]);
    BenchmarkEntry {
        name: "example1",
        problem,
        reporting_times: grid(0.02, 0, 10),
        published_norm: Some(7.14e-5),
        norm_kind: NormKind::Euclidean,
        default_blocks: 10,
        oracle_steps: 100_000,
    }
}

/// Fast growth: `x' = 100x`, `x(0) = 1` on `[0, 0.1]`.
fn example2() -> BenchmarkEntry {
    let problem = IvpProblem::affine((0.0, 0.1), vec![1.0], scalar(100.0), |_| vec![0.0])
        .expect("valid problem")
        .with_exact(|t| vec![(100.0 * t).exp()]);
    BenchmarkEntry {
        name: "example2",
        problem,
        reporting_times: grid(0.02, 0, 5),
        published_norm: Some(8.03),
        norm_kind: NormKind::Euclidean,
        // width-0.01 blocks reproduce the tabulated errors; width 0.02 does not
        default_blocks: 10,
        oracle_steps: 100_000,
    }
}

/// Nonlinear: `x' = 5e^{5t}(x - t)² + 1`, `x(0) = -1` on `[0, 1]`, with
/// solution `x = t - e^{-5t}`.
fn example3() -> BenchmarkEntry {
    let problem = IvpProblem::new((0.0, 1.0), vec![-1.0], |x, t| {
        vec![5.0 * (5.0 * t).exp() * (x[0] - t).powi(2) + 1.0]
    })
    .expect("valid problem")
    .with_jacobian(|x, t| scalar(10.0 * (5.0 * t).exp() * (x[0] - t)))
    .with_exact(|t| vec![t - (-5.0 * t).exp()]);
    BenchmarkEntry {
        name: "example3",
        problem,
        reporting_times: grid(0.2, 1, 5),
        published_norm: Some(6.7e-9),
        norm_kind: NormKind::Euclidean,
        default_blocks: 5,
        oracle_steps: 10_000,
    }
}

/// Stiff linear system with decay rates 0.1 and 200 on `[0, 50]`.
fn example4() -> BenchmarkEntry {
    let a = DMatrix::from_row_slice(2, 2, &[-0.1, -199.9, 0.0, -200.0]);
    let problem = IvpProblem::affine((0.0, 50.0), vec![2.0, 1.0], a, |_| vec![0.0, 0.0])
        .expect("valid problem")
        .with_exact(|t| {
            let fast = (-200.0 * t).exp();
            vec![(-0.1 * t).exp() + fast, fast]
        });
    BenchmarkEntry {
        name: "example4",
        problem,
        reporting_times: grid(10.0, 1, 5),
        published_norm: Some(1.1256e-3),
        norm_kind: NormKind::Frobenius,
        default_blocks: 50,
        oracle_steps: 100_000,
    }
}

/// Lotka–Volterra predator/prey on `[0, 1]`; no closed form.
fn example5() -> BenchmarkEntry {
    let problem = IvpProblem::new((0.0, 1.0), vec![0.1, 0.1], |x, _| {
        vec![x[0] * (0.76 - 0.45 * x[1]), -x[1] * (0.18 - 0.82 * x[0])]
    })
    .expect("valid problem")
    .with_jacobian(|x, _| {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                0.76 - 0.45 * x[1],
                -0.45 * x[0],
                0.82 * x[1],
                -0.18 + 0.82 * x[0],
            ],
        )
    });
    BenchmarkEntry {
        name: "example5",
        problem,
        reporting_times: grid(0.25, 1, 4),
        published_norm: None,
        norm_kind: NormKind::Frobenius,
        default_blocks: 4,
        oracle_steps: 10_000,
    }
}
