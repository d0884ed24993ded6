//! Randomized end-to-end check of the flow's guarantees.
//!
//! Each trial draws a target with well-separated singular values and runs
//! the flow from `starts` random rank-k matrices. Every run is compared with
//! the truncated SVD and its Lyapunov and rank records are audited. Per
//! problem, the factor certificate and the closed-form linearization at the
//! optimum are also checked. With `--start-at-unstable` every problem gets
//! one extra start placed exactly on an unstable equilibrium.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::approximate::MatchedEquilibrium;
use super::{io, CliError, DEFAULT_SEED, EXIT_LYAPUNOV, EXIT_OK, SCHEMA_VERSION};
use crate::equilibria::{
    classify, linearization_matrix, match_to_equilibrium, tangent_frame, Verdict,
};
use crate::flow::FlowProblem;
use crate::integrator::{default_start, integrate, integrate_with_factors, FlowConfig, Status};
use crate::matrix::DenseMatrix;
use crate::random::{gapped_spectrum, seeded_rng};
use crate::svd::{generate_with_spectrum, svd, svd_truncate, SingularSpectrum};

/// Accepted distance to the truncated SVD, relative to `|A|`.
pub const CONVERGENCE_TOL: f64 = 1e-6;
/// Relative objective increase counted as a Lyapunov violation.
pub const LYAPUNOV_TOL: f64 = 1e-12;
pub const CERTIFICATE_HORIZON: f64 = 0.5;
const MIN_RELATIVE_GAP: f64 = 0.1;

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 8)]
    pub m: usize,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    /// Number of random problems.
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Random starts per problem.
    #[arg(long, default_value_t = 1)]
    pub starts: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; all available cores when omitted.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Add one start per problem exactly at an unstable equilibrium.
    #[arg(long)]
    pub start_at_unstable: bool,
    /// Destination for the JSON report; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub no_timestamp: bool,
}

impl Default for VerifyArgs {
    fn default() -> Self {
        VerifyArgs {
            m: 8,
            n: 5,
            rank: 2,
            trials: 50,
            starts: 1,
            seed: DEFAULT_SEED,
            jobs: None,
            start_at_unstable: false,
            output: None,
            no_timestamp: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub trial: usize,
    pub start: usize,
    pub engineered: bool,
    pub status: Status,
    pub stable: bool,
    pub relative_distance: f64,
    pub max_relative_increase: f64,
    pub equilibrium: Option<MatchedEquilibrium>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateSummary {
    pub checked: usize,
    pub inconclusive: usize,
    /// Largest `|X - G K H^{-1}| / |K|`.
    pub max_relative_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearizationSummary {
    pub checked: usize,
    /// Largest gap between closed-form and explicit eigenvalues at the
    /// optimum, relative to `sigma_1^2`.
    pub max_relative_error: f64,
    pub max_asymmetry: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EngineeredSummary {
    pub count: usize,
    /// Engineered runs that ended on an unstable equilibrium with a witness.
    pub reported_non_optimal: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub starts: usize,
    pub seed: u64,
    pub runs: usize,
    pub converged_runs: usize,
    pub stable_runs: usize,
    pub stable_fraction: f64,
    /// Stable fraction over the random (not engineered) starts only.
    pub random_stable_fraction: f64,
    pub lyapunov_violations: usize,
    pub max_relative_increase: f64,
    pub rank_drift_events: usize,
    pub certificate: CertificateSummary,
    pub linearization: LinearizationSummary,
    pub engineered: EngineeredSummary,
    /// Every run that did not end at the truncated SVD.
    pub non_optimal_runs: Vec<RunOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl VerifyReport {
    pub fn exit_code(&self) -> u8 {
        if self.lyapunov_violations > 0 {
            EXIT_LYAPUNOV
        } else {
            EXIT_OK
        }
    }
}

struct Problem {
    a: DenseMatrix,
    spectrum: SingularSpectrum,
    oracle: DenseMatrix,
    start_seeds: Vec<u64>,
}

struct ProblemChecks {
    certificate: Option<f64>,
    linearization_error: f64,
    asymmetry: f64,
}

fn draw_problem(args: &VerifyArgs, seed: u64) -> Result<Problem, CliError> {
    let mut rng = seeded_rng(seed);
    let r = args.m.min(args.n);
    let gap = MIN_RELATIVE_GAP.min(0.5 / r as f64);
    let scale = rng.random_range(1.0..3.0);
    let sigma = gapped_spectrum(r, gap, scale, &mut rng);
    let a = generate_with_spectrum(args.m, args.n, &sigma, rng.random())?;
    let start_seeds = (0..args.starts).map(|_| rng.random()).collect();
    let spectrum = svd(&a);
    let oracle = svd_truncate(&a, args.rank)?.matrix;
    Ok(Problem {
        a,
        spectrum,
        oracle,
        start_seeds,
    })
}

fn optimum_vector(sigma: &[f64], k: usize) -> Vec<f64> {
    sigma
        .iter()
        .enumerate()
        .map(|(i, &s)| if i < k { s } else { 0.0 })
        .collect()
}

/// Equilibrium on the `k` smallest singular values; unstable whenever
/// `k < min(m, n)`.
fn bottom_vector(sigma: &[f64], k: usize) -> Vec<f64> {
    let r = sigma.len();
    sigma
        .iter()
        .enumerate()
        .map(|(i, &s)| if i >= r - k { s } else { 0.0 })
        .collect()
}

fn check_problem(
    problem: &Problem,
    k: usize,
    config: &FlowConfig,
) -> Result<ProblemChecks, CliError> {
    let flow = FlowProblem::new(problem.a.clone(), k)?;
    let k0 = default_start(&problem.a, k, problem.start_seeds[0] ^ 0x5eed)?;
    let run = integrate_with_factors(&flow, &k0, config, CERTIFICATE_HORIZON)?;
    let certificate = run.certificate.residual.map(|r| r / k0.norm());

    let e = optimum_vector(&problem.spectrum.sigma, k);
    let report = classify(&problem.spectrum, &e)?;
    let basis: Vec<DenseMatrix> = tangent_frame(&problem.spectrum, &e)
        .into_iter()
        .map(|(_, b)| b)
        .collect();
    let a = problem.spectrum.reconstruct();
    let jac = linearization_matrix(&a, &problem.spectrum.compose(&e), &basis)?;
    let asymmetry = jac.asymmetry();
    let sym = (&jac + &jac.transpose()).scaled(0.5);
    let explicit = sym.symmetric_eigenvalues()?;
    let mut closed: Vec<f64> = report.eigenvalues.iter().map(|m| m.value).collect();
    closed.sort_by(f64::total_cmp);
    let s1 = problem.spectrum.sigma[0];
    let linearization_error = if closed.len() == explicit.len() {
        closed
            .iter()
            .zip(&explicit)
            .map(|(c, x)| (c - x).abs() / (s1 * s1))
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(ProblemChecks {
        certificate,
        linearization_error,
        asymmetry,
    })
}

fn run_one(
    problem: &Problem,
    k: usize,
    config: &FlowConfig,
    x0: &DenseMatrix,
    (trial, start, engineered): (usize, usize, bool),
) -> Result<RunOutcome, CliError> {
    let flow = FlowProblem::new(problem.a.clone(), k)?;
    let trajectory = integrate(&flow, x0, config)?;
    let x = trajectory.final_state();
    let scale = problem.a.norm();
    let relative_distance = (x - &problem.oracle).norm() / scale;
    let stable = trajectory.status == Status::Converged && relative_distance <= CONVERGENCE_TOL;
    let equilibrium = if stable {
        None
    } else {
        match_to_equilibrium(&problem.spectrum, x, CONVERGENCE_TOL * scale).map(|r| {
            MatchedEquilibrium {
                support: r.support,
                verdict: r.verdict,
                witness: r.witness,
            }
        })
    };
    Ok(RunOutcome {
        trial,
        start,
        engineered,
        status: trajectory.status,
        stable,
        relative_distance,
        max_relative_increase: trajectory.stats.max_relative_increase,
        equilibrium,
    })
}

fn validate(args: &VerifyArgs) -> Result<(), CliError> {
    if args.trials == 0 || args.starts == 0 {
        return Err(CliError::Usage(
            "--trials and --starts must be at least 1".into(),
        ));
    }
    let r = args.m.min(args.n);
    if args.rank == 0 || args.rank > r {
        return Err(CliError::Usage(format!(
            "--rank must satisfy 1 <= k <= min(m, n) = {r}"
        )));
    }
    if args.start_at_unstable && args.rank == r {
        return Err(CliError::Usage(
            "--start-at-unstable needs k < min(m, n); at full rank every equilibrium is stable"
                .into(),
        ));
    }
    Ok(())
}

pub fn run_verify(args: &VerifyArgs) -> Result<VerifyReport, CliError> {
    validate(args)?;
    let clock = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        builder = builder.num_threads(jobs);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let config = FlowConfig::default();
    let k = args.rank;

    let mut master = seeded_rng(args.seed);
    let trial_seeds: Vec<u64> = (0..args.trials).map(|_| master.random()).collect();

    let (problems, checks, outcomes) = pool.install(|| -> Result<_, CliError> {
        let problems: Vec<Problem> = trial_seeds
            .par_iter()
            .map(|&s| draw_problem(args, s))
            .collect::<Result<_, _>>()?;
        let checks: Vec<ProblemChecks> = problems
            .par_iter()
            .map(|p| check_problem(p, k, &config))
            .collect::<Result<_, _>>()?;

        let mut jobs: Vec<(usize, usize, bool)> = Vec::new();
        for trial in 0..args.trials {
            jobs.extend((0..args.starts).map(|s| (trial, s, false)));
            if args.start_at_unstable {
                jobs.push((trial, args.starts, true));
            }
        }
        let outcomes: Vec<RunOutcome> = jobs
            .par_iter()
            .map(|&(trial, start, engineered)| {
                let p = &problems[trial];
                let x0 = if engineered {
                    p.spectrum.compose(&bottom_vector(&p.spectrum.sigma, k))
                } else {
                    default_start(&p.a, k, p.start_seeds[start])?
                };
                run_one(p, k, &config, &x0, (trial, start, engineered))
            })
            .collect::<Result<_, _>>()?;
        Ok((problems, checks, outcomes))
    })?;
    drop(problems);

    let runs = outcomes.len();
    let stable_runs = outcomes.iter().filter(|o| o.stable).count();
    let random: Vec<&RunOutcome> = outcomes.iter().filter(|o| !o.engineered).collect();
    let engineered: Vec<&RunOutcome> = outcomes.iter().filter(|o| o.engineered).collect();
    let reported_non_optimal = engineered
        .iter()
        .filter(|o| {
            o.equilibrium
                .as_ref()
                .is_some_and(|e| e.verdict == Verdict::Unstable && e.witness.is_some())
        })
        .count();

    let conclusive: Vec<f64> = checks.iter().filter_map(|c| c.certificate).collect();
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        m: args.m,
        n: args.n,
        k,
        trials: args.trials,
        starts: args.starts,
        seed: args.seed,
        runs,
        converged_runs: outcomes
            .iter()
            .filter(|o| o.status == Status::Converged)
            .count(),
        stable_runs,
        stable_fraction: stable_runs as f64 / runs as f64,
        random_stable_fraction: random.iter().filter(|o| o.stable).count() as f64
            / random.len() as f64,
        lyapunov_violations: outcomes
            .iter()
            .filter(|o| o.max_relative_increase > LYAPUNOV_TOL)
            .count(),
        max_relative_increase: outcomes
            .iter()
            .map(|o| o.max_relative_increase)
            .fold(0.0, f64::max),
        rank_drift_events: outcomes
            .iter()
            .filter(|o| o.status == Status::RankDriftDetected)
            .count(),
        certificate: CertificateSummary {
            checked: checks.len(),
            inconclusive: checks.len() - conclusive.len(),
            max_relative_residual: conclusive.iter().copied().fold(0.0, f64::max),
        },
        linearization: LinearizationSummary {
            checked: checks.len(),
            max_relative_error: checks
                .iter()
                .map(|c| c.linearization_error)
                .fold(0.0, f64::max),
            max_asymmetry: checks.iter().map(|c| c.asymmetry).fold(0.0, f64::max),
        },
        engineered: EngineeredSummary {
            count: engineered.len(),
            reported_non_optimal,
        },
        non_optimal_runs: outcomes.iter().filter(|o| !o.stable).cloned().collect(),
        wall_time_seconds: (!args.no_timestamp).then(|| clock.elapsed().as_secs_f64()),
    };
    Ok(report)
}

pub fn execute(args: &VerifyArgs) -> Result<u8, CliError> {
    let report = run_verify(args)?;
    io::emit_json(&report, args.output.as_deref())?;
    if report.lyapunov_violations > 0 {
        eprintln!(
            "error: {} runs increased the objective by more than {LYAPUNOV_TOL:e} relative",
            report.lyapunov_violations
        );
    }
    Ok(report.exit_code())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lyapunov_violation_sets_exit_code() {
        let args = VerifyArgs {
            trials: 1,
            no_timestamp: true,
            ..VerifyArgs::default()
        };
        let mut report = run_verify(&args).unwrap();
        assert_eq!(report.exit_code(), EXIT_OK);
        report.lyapunov_violations = 1;
        assert_eq!(report.exit_code(), EXIT_LYAPUNOV);
    }

    #[test]
    fn bottom_equilibrium_is_unstable() {
        let sigma = [3.0, 2.0, 1.0];
        assert_eq!(bottom_vector(&sigma, 2), vec![0.0, 2.0, 1.0]);
        assert_eq!(optimum_vector(&sigma, 2), vec![3.0, 2.0, 0.0]);
    }
}
