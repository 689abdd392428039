//! Command-line front end: `list`, `run` and `order`.
//!
//! Exit codes: 0 on success, 1 for argument errors, 2 for an unknown problem
//! name and 3 when the solver fails. Anything written to the diagnostic
//! stream is an error, so stderr is non-empty exactly when the status is
//! non-zero.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis::{self, error_report_at, rk4_sampled, ErrorReport, OrderEstimate, Reference};
use crate::error::Error;
use crate::problems::{self, BenchmarkEntry};
use crate::solver::{march, SolverConfig, Trajectory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNKNOWN_PROBLEM: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

pub const CSV_HEADER: &str = "t,component,value,reference,abs_error";

#[derive(Debug, Parser)]
#[command(
    name = "scs",
    version,
    about = "Block-implicit IVP solver and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the benchmark problem names.
    List,
    /// Solve a benchmark problem and report errors at its reporting times.
    Run {
        #[command(flatten)]
        target: Target,
        /// Number of uniform blocks (default: the problem's reporting grid).
        #[arg(long)]
        blocks: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Reference to compare against (default: exact when available).
        #[arg(long, value_enum)]
        compare: Option<Compare>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Estimate the convergence order by repeatedly halving the block width.
    Order {
        #[command(flatten)]
        target: Target,
        /// Number of runs; each doubles the block count of the previous one.
        #[arg(long, default_value_t = 3)]
        refinements: usize,
        /// Block count of the coarsest run (default: the problem's reporting grid).
        #[arg(long)]
        blocks: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, clap::Args)]
struct Target {
    /// Problem name (see `scs list`).
    #[arg(value_name = "PROBLEM")]
    name: Option<String>,
    #[arg(long = "problem", value_name = "PROBLEM")]
    problem: Option<String>,
}

impl Target {
    fn resolve(&self) -> Result<&str, String> {
        match (&self.name, &self.problem) {
            (Some(a), Some(b)) if a != b => {
                Err(format!("conflicting problem names `{a}` and `{b}`"))
            }
            (Some(a), _) | (None, Some(a)) => Ok(a),
            (None, None) => Err("a problem name is required".into()),
        }
    }
}

#[derive(Debug, clap::Args)]
struct SolverArgs {
    /// Interior nodes per block.
    #[arg(long, default_value_t = 5)]
    points: usize,
    #[arg(long = "newton-tol", default_value_t = 1e-12)]
    newton_tol: f64,
    #[arg(long = "max-iter", default_value_t = 25)]
    max_iter: usize,
    /// RK4 steps per unit time for the oracle (default depends on the problem).
    #[arg(long = "oracle-steps")]
    oracle_steps: Option<u64>,
}

impl SolverArgs {
    fn config(&self, blocks: usize) -> Result<SolverConfig, String> {
        let config = SolverConfig {
            newton_tol: self.newton_tol,
            newton_max_iter: self.max_iter,
            ..SolverConfig::new(self.points, blocks)
        };
        config.validate().map_err(|e| e.to_string())?;
        if self.oracle_steps == Some(0) {
            return Err("--oracle-steps must be at least 1".into());
        }
        Ok(config)
    }
}

#[derive(Debug, clap::Args)]
struct OutputArgs {
    #[arg(long = "output", value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    /// Write the report to a file instead of stdout.
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Compare {
    Exact,
    Oracle,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Table,
    Csv,
}

enum Failure {
    Usage(String),
    Unknown(String),
    Solver(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownProblem(name) => Failure::Unknown(name),
            other => Failure::Solver(other),
        }
    }
}

/// Parses `args` (program name first) and executes the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };

    let result = match &cli.command {
        Command::List => Ok(cmd_list()),
        Command::Run {
            target,
            blocks,
            solver,
            compare,
            output,
        } => cmd_run(target, *blocks, solver, *compare, output.format)
            .map(|text| (text, output.out.clone())),
        Command::Order {
            target,
            refinements,
            blocks,
            solver,
            output,
        } => cmd_order(target, *refinements, *blocks, solver, output.format)
            .map(|text| (text, output.out.clone())),
    }
    .and_then(|(text, out)| emit(&text, out.as_ref(), stdout));

    match result {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let (code, message) = match failure {
                Failure::Usage(m) => (EXIT_USAGE, format!("error: {m}")),
                Failure::Io(m) => (EXIT_USAGE, format!("error: {m}")),
                Failure::Unknown(name) => (
                    EXIT_UNKNOWN_PROBLEM,
                    format!(
                        "error: unknown problem `{name}` (available: {})",
                        problems::list().join(", ")
                    ),
                ),
                Failure::Solver(e) => (EXIT_SOLVER, format!("error: {e} [{}]", e.kind())),
            };
            let _ = writeln!(stderr, "{message}");
            code
        }
    }
}

fn emit(text: &str, out: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
    }
}

fn cmd_list() -> (String, Option<PathBuf>) {
    let mut text = String::new();
    for name in problems::list() {
        text.push_str(name);
        text.push('\n');
    }
    (text, None)
}

fn lookup(target: &Target) -> Result<BenchmarkEntry, Failure> {
    let name = target.resolve().map_err(Failure::Usage)?;
    Ok(problems::get(name)?)
}

fn cmd_run(
    target: &Target,
    blocks: Option<usize>,
    solver: &SolverArgs,
    compare: Option<Compare>,
    format: OutputFormat,
) -> Result<String, Failure> {
    let entry = lookup(target)?;
    let blocks = blocks.unwrap_or(entry.default_blocks);
    let config = solver.config(blocks).map_err(Failure::Usage)?;
    let has_exact = entry.problem.exact().is_some();
    let compare = compare.unwrap_or(if has_exact {
        Compare::Exact
    } else {
        Compare::Oracle
    });
    if compare == Compare::Exact && !has_exact {
        return Err(Failure::Usage(format!(
            "{} has no exact solution; use --compare oracle",
            entry.name
        )));
    }

    let traj = march(&entry.problem, &config)?;
    let times = reporting_times(&entry, &traj);

    let report = match compare {
        Compare::None => None,
        Compare::Exact => Some(error_report_at(
            &traj,
            &times,
            entry.norm_kind,
            Reference::Exact,
        )?),
        Compare::Oracle => {
            let steps = solver.oracle_steps.unwrap_or(entry.oracle_steps);
            let oracle = rk4_sampled(&entry.problem, steps, &times)?;
            Some(error_report_at(
                &traj,
                &times,
                entry.norm_kind,
                Reference::Oracle(&oracle),
            )?)
        }
    };

    let values: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| {
            traj.value_at(t, analysis::NODE_MATCH_TOL)
                .expect("reporting times are nodes")
                .to_vec()
        })
        .collect();

    Ok(match format {
        OutputFormat::Csv => run_csv(&times, &values, report.as_ref()),
        OutputFormat::Table => {
            run_table(&entry, &config, compare, &times, &values, report.as_ref())
        }
    })
}

/// The registry's reporting times when they all fall on nodes of this run,
/// otherwise the run's own block boundaries.
fn reporting_times(entry: &BenchmarkEntry, traj: &Trajectory) -> Vec<f64> {
    let on_grid = entry
        .reporting_times
        .iter()
        .all(|&t| traj.value_at(t, analysis::NODE_MATCH_TOL).is_some());
    if on_grid {
        return entry.reporting_times.clone();
    }
    traj.times()
        .iter()
        .zip(traj.block_index())
        .enumerate()
        .filter(|(i, (_, &b))| traj.block_index().get(i + 1) != Some(&b))
        .map(|(_, (&t, _))| t)
        .collect()
}

fn csv_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn run_csv(times: &[f64], values: &[Vec<f64>], report: Option<&ErrorReport>) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (i, (&t, row)) in times.iter().zip(values).enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let (reference, err) = match report {
                Some(r) => (csv_number(r.reference[i][c]), csv_number(r.pointwise[i][c])),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                csv_number(t),
                c + 1,
                csv_number(v),
                reference,
                err
            );
        }
    }
    out
}

fn run_table(
    entry: &BenchmarkEntry,
    config: &SolverConfig,
    compare: Compare,
    times: &[f64],
    values: &[Vec<f64>],
    report: Option<&ErrorReport>,
) -> String {
    let m = entry.problem.dimension();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "problem {}  blocks {}  points {}  compare {}",
        entry.name,
        config.block_count(),
        config.points_per_block,
        match compare {
            Compare::Exact => "exact",
            Compare::Oracle => "oracle",
            Compare::None => "none",
        }
    );

    let mut header = format!("{:>10}", "t");
    for c in 1..=m {
        let _ = write!(header, "  {:>22}", format!("x{c}"));
        if report.is_some() {
            let _ = write!(
                header,
                "  {:>22}  {:>12}  {:>12}",
                format!("ref{c}"),
                format!("E{c}"),
                format!("rel{c}")
            );
        }
    }
    out.push_str(&header);
    out.push('\n');
    out.push_str(&"-".repeat(header.len()));
    out.push('\n');

    let relative = report.map(ErrorReport::relative);
    for (i, (&t, row)) in times.iter().zip(values).enumerate() {
        let _ = write!(out, "{t:>10.4}");
        for (c, v) in row.iter().enumerate() {
            let _ = write!(out, "  {v:>22.15e}");
            if let (Some(r), Some(rel)) = (report, &relative) {
                let _ = write!(
                    out,
                    "  {:>22.15e}  {:>12.5e}  {:>12.5e}",
                    r.reference[i][c], r.pointwise[i][c], rel[i][c]
                );
            }
        }
        out.push('\n');
    }

    if let Some(r) = report {
        let _ = writeln!(out, "||E|| ({}) = {:.5e}", r.norm_kind.as_str(), r.norm);
        if let Some(published) = entry.published_norm {
            let _ = writeln!(out, "published ||E|| = {published:.5e}");
        }
    }
    out
}

fn cmd_order(
    target: &Target,
    refinements: usize,
    blocks: Option<usize>,
    solver: &SolverArgs,
    format: OutputFormat,
) -> Result<String, Failure> {
    let entry = lookup(target)?;
    if refinements < 2 {
        return Err(Failure::Usage(
            "--refinements must be at least 2 to measure a slope".into(),
        ));
    }
    let config = solver
        .config(blocks.unwrap_or(entry.default_blocks))
        .map_err(Failure::Usage)?;
    let steps = solver.oracle_steps.unwrap_or(entry.oracle_steps);
    let estimate = analysis::empirical_order_with(&entry.problem, &config, refinements, steps)?;
    let base = config.block_count();

    Ok(match format {
        OutputFormat::Csv => order_csv(base, &estimate),
        OutputFormat::Table => order_table(entry.name, &config, base, &estimate),
    })
}

fn order_csv(base: usize, est: &OrderEstimate) -> String {
    let mut out = String::from("blocks,h,error,slope\n");
    for (i, (h, e)) in est.step_sizes.iter().zip(&est.errors).enumerate() {
        let slope = match i.checked_sub(1).and_then(|j| est.slopes[j]) {
            Some(s) => csv_number(s),
            None => String::new(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{}",
            base << i,
            csv_number(*h),
            csv_number(*e),
            slope
        );
    }
    out
}

fn order_table(name: &str, config: &SolverConfig, base: usize, est: &OrderEstimate) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "problem {name}  points {}  refinements {}",
        config.points_per_block,
        est.errors.len()
    );
    let _ = writeln!(
        out,
        "{:>8}  {:>12}  {:>12}  {:>8}",
        "blocks", "h", "error", "slope"
    );
    for (i, (h, e)) in est.step_sizes.iter().zip(&est.errors).enumerate() {
        let slope = match i.checked_sub(1).map(|j| est.slopes[j]) {
            Some(Some(s)) => format!("{s:.3}"),
            Some(None) => "degen".to_string(),
            None => "-".to_string(),
        };
        let _ = writeln!(out, "{:>8}  {h:>12.5e}  {e:>12.5e}  {slope:>8}", base << i);
    }
    match est.estimated_order {
        Some(p) => {
            let _ = writeln!(out, "estimated order: {p:.3}");
        }
        None => {
            let _ = writeln!(
                out,
                "estimated order: degenerate (errors at rounding level)"
            );
        }
    }
    out
}
