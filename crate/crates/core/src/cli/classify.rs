use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use super::{io, CliError, EXIT_ERROR, EXIT_OK, SCHEMA_VERSION};
use crate::equilibria::{enumerate_equilibria, EquilibriumReport, Verdict};
use crate::matrix::DenseMatrix;
use crate::svd::svd;

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub rank: usize,
    /// Destination for the JSON report; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub schema_version: u32,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub sigma: Vec<f64>,
    pub stable_count: usize,
    pub equilibria: Vec<EquilibriumReport>,
}

pub fn classify_matrix(a: &DenseMatrix, k: usize) -> Result<ClassifyReport, CliError> {
    let spectrum = svd(a);
    let equilibria = enumerate_equilibria(&spectrum, k)?;
    let stable_count = equilibria
        .iter()
        .filter(|r| r.verdict == Verdict::Stable)
        .count();
    Ok(ClassifyReport {
        schema_version: SCHEMA_VERSION,
        m: a.rows(),
        n: a.cols(),
        k,
        sigma: spectrum.sigma,
        stable_count,
        equilibria,
    })
}

pub fn execute(args: &ClassifyArgs) -> Result<u8, CliError> {
    let a = io::read_matrix(&args.input)?;
    let report = classify_matrix(&a, args.rank)?;
    io::emit_json(&report, args.output.as_deref())?;
    if report.stable_count != 1 {
        eprintln!(
            "error: expected exactly one stable equilibrium, found {}",
            report.stable_count
        );
        return Ok(EXIT_ERROR);
    }
    Ok(EXIT_OK)
}
