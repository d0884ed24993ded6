use std::path::PathBuf;

use clap::Args;

use super::{io, CliError, DEFAULT_SEED, EXIT_OK};
use crate::svd::generate_with_spectrum;

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    /// Singular values in non-increasing order, comma separated; exactly
    /// min(m, n) of them.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    pub sigma: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Destination file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn execute(args: &GenerateArgs) -> Result<u8, CliError> {
    let a = generate_with_spectrum(args.m, args.n, &args.sigma, args.seed)?;
    match &args.output {
        Some(path) => io::write_matrix(path, &a)?,
        None => print!("{}", io::format_matrix(&a)),
    }
    Ok(EXIT_OK)
}
