//! Best rank-k approximation of a real matrix by integrating the rank-preserving
//! quasi-gradient flow
//!
//! ```text
//! X' = (A - X) X^T X + X X^T (A - X)
//! ```
//!
//! whose limit from almost every rank-k start is the truncated SVD of `A`.
//! Alongside the integrator the crate exposes the geometry of the fixed-rank
//! orbit, the equilibrium set of the flow with its closed-form linear
//! stability analysis, and a one-sided Jacobi SVD used as an independent
//! oracle.

pub mod cli;
pub mod equilibria;
pub mod error;
pub mod flow;
pub mod frobenius;
pub mod integrator;
pub mod matrix;
pub mod random;
pub mod rank_manifold;
pub mod svd;

pub use error::{Error, Result};
pub use flow::{FactorPair, FlowProblem};
pub use integrator::{FlowConfig, Status, Trajectory};
pub use matrix::DenseMatrix;
pub use rank_manifold::{BasisIndex, TangentPair};
pub use svd::SingularSpectrum;
