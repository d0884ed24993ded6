use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::Serialize;

use super::{io, CliError, DEFAULT_SEED, EXIT_ERROR, EXIT_NON_OPTIMAL, EXIT_OK, SCHEMA_VERSION};
use crate::equilibria::{check_generic, match_to_equilibrium, Verdict, Witness};
use crate::flow::{objective, FlowProblem};
use crate::integrator::{default_start, integrate, FlowConfig, Status, Trajectory};
use crate::matrix::DenseMatrix;
use crate::svd::{numerical_rank, svd, svd_truncate, SpectrumSummary};

#[derive(Debug, Clone, Args)]
pub struct ApproximateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub rank: usize,
    /// Accepted distance to the truncated SVD, relative to the norm of the
    /// input.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// JSON file with integrator settings; missing fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Rank-k starting matrix; a seeded random start is used otherwise.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// CSV with t, f, grad_norm, numerical_rank, dist_to_oracle per sample.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    /// Directory receiving every recorded state as a matrix file.
    #[arg(long)]
    pub dump_states: Option<PathBuf>,
    /// Destination for the final matrix.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Destination for the JSON report; standard output when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Leave the wall time out of the report so that reruns are identical.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    Random,
    File,
    /// `k = min(m, n)` with a full-rank target: the target is its own
    /// approximation.
    Target,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemSummary {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub spectrum: SpectrumSummary,
    pub nondegenerate: bool,
    pub generic: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary {
    pub status: Status,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub samples: usize,
    pub final_t: f64,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub final_numerical_rank: usize,
    pub objective_increases: usize,
    pub max_relative_increase: f64,
}

impl TrajectorySummary {
    pub fn of(trajectory: &Trajectory) -> Self {
        let last = trajectory.last();
        let stats = &trajectory.stats;
        TrajectorySummary {
            status: trajectory.status,
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected_error + stats.rejected_monotone,
            samples: trajectory.samples.len(),
            final_t: last.t,
            final_f: last.f,
            final_grad_norm: last.grad_norm,
            final_numerical_rank: last.numerical_rank,
            objective_increases: stats.objective_increases,
            max_relative_increase: stats.max_relative_increase,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchedEquilibrium {
    pub support: Vec<usize>,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleComparison {
    pub distance: f64,
    pub relative_distance: f64,
    /// `f(X_final) - f(truncated SVD)`; never meaningfully negative.
    pub objective_gap: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub problem: ProblemSummary,
    pub config: FlowConfig,
    pub seed: u64,
    pub start: StartKind,
    pub trajectory: TrajectorySummary,
    pub equilibrium: Option<MatchedEquilibrium>,
    pub oracle: OracleComparison,
    pub optimal: bool,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl RunReport {
    pub fn exit_code(&self) -> u8 {
        if self.optimal {
            EXIT_OK
        } else if self.trajectory.status == Status::Converged
            && self
                .equilibrium
                .as_ref()
                .is_some_and(|e| e.verdict != Verdict::Stable)
        {
            EXIT_NON_OPTIMAL
        } else {
            EXIT_ERROR
        }
    }
}

pub struct Approximation {
    pub report: RunReport,
    pub trajectory: Trajectory,
    pub oracle: DenseMatrix,
}

fn relative_scale(a: &DenseMatrix) -> f64 {
    if a.norm() > 0.0 {
        a.norm()
    } else {
        1.0
    }
}

/// Integrates the flow for `a` at rank `k` and compares the end point with
/// the truncated SVD.
pub fn run_approximation(
    a: &DenseMatrix,
    k: usize,
    init: Option<DenseMatrix>,
    config: &FlowConfig,
    tol: f64,
    seed: u64,
) -> Result<Approximation, CliError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!(
            "--tol must be positive, got {tol}"
        )));
    }
    config.validate()?;
    let clock = Instant::now();
    let problem = FlowProblem::new(a.clone(), k)?;
    let (m, n) = a.shape();
    let spectrum = svd(a);
    let mut warnings = Vec::new();
    let generic = match check_generic(&spectrum) {
        Ok(()) => true,
        Err(err) => {
            log::warn!("{err}");
            warnings.push(format!("degenerate spectrum: {err}"));
            false
        }
    };
    if !problem.is_nondegenerate() {
        warnings.push(format!("target has numerical rank <= {k}"));
    }

    let (x0, start) = match init {
        Some(x0) => (x0, StartKind::File),
        None if k == m.min(n) && numerical_rank(a, config.rank_tol) == k => {
            (a.clone(), StartKind::Target)
        }
        None => (default_start(a, k, seed)?, StartKind::Random),
    };
    let trajectory = integrate(&problem, &x0, config)?;
    let x = trajectory.final_state();

    let oracle = svd_truncate(a, k)?.matrix;
    let scale = relative_scale(a);
    let distance = (x - &oracle).norm();
    let objective_gap = objective(a, x)? - objective(a, &oracle)?;
    let converged = trajectory.status == Status::Converged;
    let optimal = converged && distance <= tol * scale;

    let equilibrium = if generic {
        match_to_equilibrium(&spectrum, x, tol * scale).map(|r| MatchedEquilibrium {
            support: r.support,
            verdict: r.verdict,
            witness: r.witness,
        })
    } else {
        None
    };
    if !converged {
        warnings.push(format!(
            "integration stopped with status {:?}",
            trajectory.status
        ));
    }

    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        problem: ProblemSummary {
            m,
            n,
            k,
            spectrum: spectrum.summary(),
            nondegenerate: problem.is_nondegenerate(),
            generic,
        },
        config: config.clone(),
        seed,
        start,
        trajectory: TrajectorySummary::of(&trajectory),
        equilibrium,
        oracle: OracleComparison {
            distance,
            relative_distance: distance / scale,
            objective_gap,
            tol,
        },
        optimal,
        warnings,
        wall_time_seconds: Some(clock.elapsed().as_secs_f64()),
    };
    Ok(Approximation {
        report,
        trajectory,
        oracle,
    })
}

pub fn execute(args: &ApproximateArgs) -> Result<u8, CliError> {
    let a = io::read_matrix(&args.input)?;
    let config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            serde_json::from_str::<FlowConfig>(&text)?
        }
        None => FlowConfig::default(),
    };
    let init = args.init.as_deref().map(io::read_matrix).transpose()?;
    let Approximation {
        mut report,
        trajectory,
        oracle,
    } = run_approximation(&a, args.rank, init, &config, args.tol, args.seed)?;
    if args.no_timestamp {
        report.wall_time_seconds = None;
    }

    if let Some(path) = &args.output {
        io::write_matrix(path, trajectory.final_state())?;
    }
    if let Some(path) = &args.trajectory {
        io::write_trajectory(path, &trajectory, &oracle)?;
    }
    if let Some(dir) = &args.dump_states {
        io::dump_states(dir, &trajectory)?;
    }
    io::emit_json(&report, args.report.as_deref())?;

    let code = report.exit_code();
    match code {
        EXIT_NON_OPTIMAL => {
            let eq = report
                .equilibrium
                .as_ref()
                .expect("non-optimal exit has a match");
            match eq.witness {
                Some(w) => eprintln!(
                    "converged to non-optimal equilibrium with support {:?}; \
                     witness direction ({}, {}) has eigenvalue {}",
                    eq.support, w.p, w.q, w.eigenvalue
                ),
                None => eprintln!(
                    "converged to non-optimal equilibrium with support {:?}",
                    eq.support
                ),
            }
        }
        EXIT_ERROR => eprintln!(
            "error: run did not reach the truncated SVD (status {:?}, distance {:e})",
            report.trajectory.status, report.oracle.distance
        ),
        _ => {}
    }
    Ok(code)
}
