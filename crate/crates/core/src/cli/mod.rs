//! Command-line front end.
//!
//! Exit codes: 0 success, 1 error, 2 convergence to a non-optimal
//! equilibrium, 3 a Lyapunov violation during `verify`.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

pub mod approximate;
pub mod classify;
pub mod generate;
pub mod io;
pub mod verify;

pub use approximate::{ApproximateArgs, RunReport};
pub use classify::{ClassifyArgs, ClassifyReport};
pub use generate::GenerateArgs;
pub use verify::{VerifyArgs, VerifyReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NON_OPTIMAL: u8 = 2;
pub const EXIT_LYAPUNOV: u8 = 3;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Flow(#[from] crate::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rankflow",
    version,
    about = "Best rank-k approximation by integrating a rank-preserving gradient flow"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the flow on a matrix file and compare with the truncated SVD.
    Approximate(ApproximateArgs),
    /// Enumerate and classify every rank-k equilibrium.
    Classify(ClassifyArgs),
    /// Run the randomized end-to-end property suite.
    Verify(VerifyArgs),
    /// Write a random matrix with prescribed singular values.
    Generate(GenerateArgs),
}

/// Runs a parsed command line and returns the process exit code. Errors are
/// reported on standard error.
pub fn run(cli: Cli) -> u8 {
    let outcome = match cli.command {
        Command::Approximate(args) => approximate::execute(&args),
        Command::Classify(args) => classify::execute(&args),
        Command::Verify(args) => verify::execute(&args),
        Command::Generate(args) => generate::execute(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_ERROR
        }
    }
}
