//! Error metrics, an independent RK4 reference integrator, empirical
//! convergence orders and the initial-value stability probe.

use std::thread;

use crate::error::{Error, Result};
use crate::problems::{BenchmarkEntry, NormKind};
use crate::solver::{march, IvpProblem, Partition, SolverConfig, Trajectory};

/// Reporting times must match a trajectory node to within this distance.
pub const NODE_MATCH_TOL: f64 = 1e-9;

/// Errors below this are dominated by rounding; slopes built on them are
/// meaningless.
pub const DEGENERATE_ERROR: f64 = 1e-14;

/// RK4 steps per unit time used when no exact solution is available.
pub const DEFAULT_ORACLE_STEPS: u64 = 10_000;

/// What an approximate trajectory is compared against.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    /// The problem's closed-form solution.
    Exact,
    /// Another trajectory sampled at (at least) the reporting times.
    Oracle(&'a Trajectory),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub times: Vec<f64>,
    /// Approximate values, one row per reporting time.
    pub values: Vec<Vec<f64>>,
    pub reference: Vec<Vec<f64>>,
    /// `|value - reference|` per time and component.
    pub pointwise: Vec<Vec<f64>>,
    pub norm: f64,
    pub norm_kind: NormKind,
}

impl ErrorReport {
    /// Pointwise errors divided by `|reference|` (absolute error where the
    /// reference vanishes).
    pub fn relative(&self) -> Vec<Vec<f64>> {
        self.pointwise
            .iter()
            .zip(&self.reference)
            .map(|(err, r)| {
                err.iter()
                    .zip(r)
                    .map(|(e, r)| if *r == 0.0 { *e } else { e / r.abs() })
                    .collect()
            })
            .collect()
    }

    /// Largest pointwise error of any component.
    pub fn max_error(&self) -> f64 {
        self.pointwise.iter().flatten().fold(0.0, |m, e| m.max(*e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    /// Node spacing `h` of each run, decreasing.
    pub step_sizes: Vec<f64>,
    pub errors: Vec<f64>,
    /// Observed order between consecutive runs; `None` when either error is
    /// below [`DEGENERATE_ERROR`].
    pub slopes: Vec<Option<f64>>,
    /// Median of the usable slopes.
    pub estimated_order: Option<f64>,
}

impl OrderEstimate {
    pub fn is_degenerate(&self) -> bool {
        self.estimated_order.is_none()
    }
}

/// Classic fixed-step RK4 over the problem's whole domain, recording every
/// step. The step is `(b - a) / ceil((b - a) · steps_per_unit)`.
pub fn rk4_reference(problem: &IvpProblem, steps_per_unit: u64) -> Result<Trajectory> {
    let (a, b) = problem.domain();
    rk4_segments(problem, steps_per_unit, &[a, b], true)
}

/// RK4 as in [`rk4_reference`], but stepping exactly onto each of `times`
/// and recording only those points. Useful on long intervals where storing
/// every step is wasteful.
pub fn rk4_sampled(problem: &IvpProblem, steps_per_unit: u64, times: &[f64]) -> Result<Trajectory> {
    let (a, b) = problem.domain();
    let mut stops = vec![a];
    for &t in times {
        if t < a || t > b {
            return Err(Error::InvalidConfig(format!(
                "sample time {t} outside [{a}, {b}]"
            )));
        }
        if t > *stops.last().unwrap() {
            stops.push(t);
        }
    }
    rk4_segments(problem, steps_per_unit, &stops, false)
}

fn step_count(length: f64, steps_per_unit: u64) -> usize {
    let raw = length * steps_per_unit as f64;
    let rounded = raw.round();
    let n = if (raw - rounded).abs() <= 1e-9 * raw.max(1.0) {
        rounded
    } else {
        raw.ceil()
    };
    (n as usize).max(1)
}

fn rk4_segments(
    problem: &IvpProblem,
    steps_per_unit: u64,
    stops: &[f64],
    record_all: bool,
) -> Result<Trajectory> {
    if steps_per_unit < 1 {
        return Err(Error::InvalidConfig(
            "steps_per_unit must be at least 1".into(),
        ));
    }
    let m = problem.dimension();
    let mut x = problem.initial().to_vec();
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut tmp = vec![0.0; m];
    let axpy = |tmp: &mut Vec<f64>, x: &[f64], k: &[f64], s: f64| {
        for i in 0..tmp.len() {
            tmp[i] = x[i] + s * k[i];
        }
    };

    for w in stops.windows(2) {
        let (start, end) = (w[0], w[1]);
        let n = step_count(end - start, steps_per_unit);
        let h = (end - start) / n as f64;
        for k in 0..n {
            let t = start + k as f64 * h;
            let k1 = problem.rhs(&x, t);
            axpy(&mut tmp, &x, &k1, 0.5 * h);
            let k2 = problem.rhs(&tmp, t + 0.5 * h);
            axpy(&mut tmp, &x, &k2, 0.5 * h);
            let k3 = problem.rhs(&tmp, t + 0.5 * h);
            axpy(&mut tmp, &x, &k3, h);
            let k4 = problem.rhs(&tmp, t + h);
            for i in 0..m {
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            let t_next = if k + 1 == n {
                end
            } else {
                start + (k + 1) as f64 * h
            };
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { t: t_next });
            }
            if record_all || k + 1 == n {
                times.push(t_next);
                values.push(x.clone());
            }
        }
    }

    let block_index = (0..times.len()).collect();
    Ok(Trajectory::from_parts(
        problem.clone(),
        None,
        times,
        values,
        block_index,
    ))
}

/// Errors of `traj` at the entry's reporting times.
pub fn error_report(
    traj: &Trajectory,
    entry: &BenchmarkEntry,
    reference: Reference<'_>,
) -> Result<ErrorReport> {
    error_report_at(traj, &entry.reporting_times, entry.norm_kind, reference)
}

/// Errors of `traj` at arbitrary node times.
pub fn error_report_at(
    traj: &Trajectory,
    times: &[f64],
    norm_kind: NormKind,
    reference: Reference<'_>,
) -> Result<ErrorReport> {
    let exact = match reference {
        Reference::Exact => Some(traj.problem().exact().ok_or(Error::MissingExact)?),
        Reference::Oracle(_) => None,
    };
    let mut values = Vec::with_capacity(times.len());
    let mut refs = Vec::with_capacity(times.len());
    for &t in times {
        let approx = traj
            .value_at(t, NODE_MATCH_TOL)
            .ok_or(Error::MissingNode { t })?;
        let r = match (reference, exact) {
            (Reference::Oracle(o), _) => o
                .value_at(t, NODE_MATCH_TOL)
                .ok_or(Error::MissingNode { t })?
                .to_vec(),
            (Reference::Exact, Some(e)) => e(t),
            (Reference::Exact, None) => unreachable!(),
        };
        values.push(approx.to_vec());
        refs.push(r);
    }
    let pointwise: Vec<Vec<f64>> = values
        .iter()
        .zip(&refs)
        .map(|(v, r)| v.iter().zip(r).map(|(a, b)| (a - b).abs()).collect())
        .collect();
    let norm = pointwise
        .iter()
        .flatten()
        .map(|e| e * e)
        .sum::<f64>()
        .sqrt();
    Ok(ErrorReport {
        times: times.to_vec(),
        values,
        reference: refs,
        pointwise,
        norm,
        norm_kind,
    })
}

/// Observed convergence order under repeated halving of the block width,
/// using the exact solution if there is one and an RK4 oracle otherwise.
pub fn empirical_order(
    problem: &IvpProblem,
    base_config: &SolverConfig,
    refinements: usize,
) -> Result<OrderEstimate> {
    empirical_order_with(problem, base_config, refinements, DEFAULT_ORACLE_STEPS)
}

/// [`empirical_order`] with an explicit oracle resolution.
///
/// Runs `refinements` marches, each with twice as many blocks as the last,
/// and measures every run at the coarsest run's block boundaries.
pub fn empirical_order_with(
    problem: &IvpProblem,
    base_config: &SolverConfig,
    refinements: usize,
    oracle_steps: u64,
) -> Result<OrderEstimate> {
    if refinements < 2 {
        return Err(Error::InvalidConfig(
            "at least two refinement levels are needed for a slope".into(),
        ));
    }
    let (a, b) = problem.domain();
    let coarse = base_config.boundaries(a, b)?;
    let sample_times = coarse[1..].to_vec();

    let oracle;
    let reference = if problem.exact().is_some() {
        Reference::Exact
    } else {
        oracle = rk4_sampled(problem, oracle_steps, &sample_times)?;
        Reference::Oracle(&oracle)
    };

    let levels: Vec<Vec<f64>> = std::iter::successors(Some(coarse), |prev| Some(bisect(prev)))
        .take(refinements)
        .collect();
    let n = base_config.points_per_block as f64;

    let results: Vec<Result<(f64, f64)>> = thread::scope(|scope| {
        let handles: Vec<_> = levels
            .iter()
            .map(|bounds| {
                let config = base_config
                    .clone()
                    .with_partition(Partition::Boundaries(bounds.clone()));
                let sample_times = &sample_times;
                scope.spawn(move || {
                    let traj = march(problem, &config)?;
                    let report =
                        error_report_at(&traj, sample_times, NormKind::Frobenius, reference)?;
                    let width = bounds.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
                    Ok((width / n, report.norm))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("refinement thread panicked"))
            .collect()
    });

    let mut step_sizes = Vec::with_capacity(refinements);
    let mut errors = Vec::with_capacity(refinements);
    for r in results {
        let (h, e) = r?;
        step_sizes.push(h);
        errors.push(e);
    }

    let slopes: Vec<Option<f64>> = (0..refinements - 1)
        .map(|i| {
            let (e0, e1) = (errors[i], errors[i + 1]);
            if e0 < DEGENERATE_ERROR || e1 < DEGENERATE_ERROR {
                None
            } else {
                Some((e0 / e1).ln() / (step_sizes[i] / step_sizes[i + 1]).ln())
            }
        })
        .collect();

    let mut usable: Vec<f64> = slopes.iter().flatten().copied().collect();
    usable.sort_by(f64::total_cmp);
    let estimated_order = match usable.len() {
        0 => None,
        len if len % 2 == 1 => Some(usable[len / 2]),
        len => Some(0.5 * (usable[len / 2 - 1] + usable[len / 2])),
    };

    Ok(OrderEstimate {
        step_sizes,
        errors,
        slopes,
        estimated_order,
    })
}

fn bisect(bounds: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * bounds.len() - 1);
    for w in bounds.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.push(bounds[bounds.len() - 1]);
    out
}

/// `‖traj(α + δ) - traj(α)‖_∞ / δ`, with every component of α shifted by δ.
pub fn stability_probe(problem: &IvpProblem, config: &SolverConfig, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig("delta must be positive".into()));
    }
    let shifted: Vec<f64> = problem.initial().iter().map(|x| x + delta).collect();
    let perturbed = problem.clone().with_initial(shifted)?;
    let base = march(problem, config)?;
    let moved = march(&perturbed, config)?;
    Ok(base.max_abs_difference(&moved) / delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;
    use nalgebra::DMatrix;

    fn decay(rate: f64) -> IvpProblem {
        IvpProblem::affine(
            (0.0, 1.0),
            vec![1.0],
            DMatrix::from_element(1, 1, rate),
            |_| vec![0.0],
        )
        .unwrap()
        .with_exact(move |t| vec![(rate * t).exp()])
    }

    #[test]
    fn rk4_unit_slope() {
        let p = IvpProblem::new((0.5, 2.0), vec![0.0], |_, _| vec![1.0]).unwrap();
        for steps in [1, 3, 10] {
            let traj = rk4_reference(&p, steps).unwrap();
            assert!((traj.final_value()[0] - 1.5).abs() < 1e-14);
            assert_eq!(*traj.times().last().unwrap(), 2.0);
        }
    }

    #[test]
    fn rk4_exponential_growth() {
        let traj = rk4_reference(&decay(1.0), 1000).unwrap();
        assert_eq!(traj.len(), 1000);
        assert!((traj.final_value()[0] - std::f64::consts::E).abs() < 1e-11);
    }

    #[test]
    fn rk4_stiff_decay_fine_step() {
        let e = problems::get("example1").unwrap();
        let traj = rk4_reference(&e.problem, 100_000).unwrap();
        assert_eq!(traj.len(), 20_000);
        let exact = 0.1 + 0.9 * (-20.0_f64).exp();
        assert!((traj.final_value()[0] - exact).abs() < 1e-10);
    }

    #[test]
    fn rk4_overflow_is_reported() {
        let e = problems::get("example2").unwrap();
        let p = e.problem.with_initial(vec![1e307]).unwrap();
        assert!(matches!(
            rk4_reference(&p, 10),
            Err(Error::NonFiniteState { .. })
        ));
    }

    #[test]
    fn rk4_sampled_lands_on_times() {
        let p = decay(-1.0);
        let traj = rk4_sampled(&p, 1000, &[0.25, 0.5, 1.0]).unwrap();
        assert_eq!(traj.times(), &[0.25, 0.5, 1.0]);
        assert!((traj.values()[1][0] - (-0.5_f64).exp()).abs() < 1e-12);
        assert!(rk4_sampled(&p, 1000, &[2.0]).is_err());
    }

    #[test]
    fn report_of_exact_trajectory_is_zero() {
        let e = problems::get("example1").unwrap();
        let traj = march(&e.problem, &SolverConfig::new(5, 10)).unwrap();
        let report = error_report(&traj, &e, Reference::Oracle(&traj)).unwrap();
        assert_eq!(report.norm, 0.0);
        assert!(report.pointwise.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn report_needs_matching_nodes() {
        let e = problems::get("example1").unwrap();
        let traj = march(&e.problem, &SolverConfig::new(5, 3)).unwrap();
        assert!(matches!(
            error_report(&traj, &e, Reference::Exact),
            Err(Error::MissingNode { .. })
        ));
        let e5 = problems::get("example5").unwrap();
        let traj = march(&e5.problem, &SolverConfig::new(5, 4)).unwrap();
        assert_eq!(
            error_report(&traj, &e5, Reference::Exact).unwrap_err(),
            Error::MissingExact
        );
    }

    #[test]
    fn relative_errors() {
        let report = ErrorReport {
            times: vec![0.0, 1.0],
            values: vec![vec![1.0], vec![3.0]],
            reference: vec![vec![0.0], vec![-2.0]],
            pointwise: vec![vec![1.0], vec![5.0]],
            norm: 26.0_f64.sqrt(),
            norm_kind: NormKind::Euclidean,
        };
        assert_eq!(report.relative(), vec![vec![1.0], vec![2.5]]);
        assert_eq!(report.max_error(), 5.0);
    }

    #[test]
    fn order_on_decay() {
        let est = empirical_order(&decay(-1.0), &SolverConfig::new(5, 2), 3).unwrap();
        assert_eq!(est.slopes.len(), 2);
        assert!(est.step_sizes.windows(2).all(|w| w[0] > w[1]));
        assert!(est.estimated_order.unwrap() >= 4.5, "{est:?}");

        let est = empirical_order(&decay(-1.0), &SolverConfig::new(3, 2), 3).unwrap();
        assert!(est.estimated_order.unwrap() >= 2.5, "{est:?}");
    }

    #[test]
    fn order_degenerate_on_polynomial() {
        let p = IvpProblem::new((0.0, 1.0), vec![0.0], |_, _| vec![1.0])
            .unwrap()
            .with_exact(|t| vec![t]);
        let est = empirical_order(&p, &SolverConfig::new(5, 2), 3).unwrap();
        assert!(est.errors.iter().all(|&e| e <= 1e-12));
        assert!(est.is_degenerate());
        assert!(est.slopes.iter().all(Option::is_none));
    }

    #[test]
    fn order_requires_two_levels() {
        assert!(empirical_order(&decay(-1.0), &SolverConfig::new(5, 2), 1).is_err());
    }

    #[test]
    fn probe_on_constant_solution() {
        let p = IvpProblem::new((0.0, 1.0), vec![0.5], |_, _| vec![0.0]).unwrap();
        let ratio = stability_probe(&p, &SolverConfig::new(5, 4), 1e-3).unwrap();
        assert!((ratio - 1.0).abs() < 1e-10);
        assert!(stability_probe(&p, &SolverConfig::new(5, 4), 0.0).is_err());
    }

    #[test]
    fn probe_on_growth() {
        let ratio = stability_probe(&decay(1.0), &SolverConfig::new(5, 4), 1e-8).unwrap();
        assert!(
            (ratio / std::f64::consts::E - 1.0).abs() < 0.05,
            "ratio = {ratio}"
        );
    }
}
