//! A self-contained interior-point engine for smooth nonlinear programs
//!
//! ```text
//!   min f(x)  s.t.  g(x) = 0,  h(x) <= 0,  lo <= x <= hi
//! ```
//!
//! Problems implement [`NlpProblem`]; [`solve`] and [`solve_warm`] return an
//! [`NlpSolution`] whose status tells whether the scaled KKT conditions were
//! met.

mod bfgs;
pub mod derivcheck;
mod ipm;
pub mod linalg;
mod problem;
pub mod sparse;

pub use bfgs::DampedBfgs;
pub use derivcheck::{check_derivatives, DerivativeReport};
pub use ipm::{
    solve, solve_warm, IterationRecord, KktResiduals, LinearSolverChoice, NlpSolution,
    SolveStatus, SolverOptions,
};
pub use problem::NlpProblem;
pub use sparse::Triplets;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NlpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("bounds of variable {index} are inconsistent: [{lo}, {hi}]")]
    InvalidBounds { index: usize, lo: f64, hi: f64 },
    #[error("KKT system stayed singular after regularization")]
    SingularSystem,
}
