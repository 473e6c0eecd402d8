//! AC-DC optimal power flow.
//!
//! Variables are AC voltage magnitudes and angles, DC voltages, generator
//! active and reactive output, and converter active and reactive injections
//! (positive from DC to AC). The objective is `Σ b_G P_G + a_Q (Q_G² + Q_C²)`
//! in currency per hour with powers in MW / Mvar, evaluated on per-unit
//! variables. Auxiliary generators carry no cost.

mod map;
mod problem;
mod solution;

pub use map::OpfVariableMap;
pub use problem::{assemble, restrict, OpfProblem, Scope};
pub use solution::{
    evaluate_balance, BalanceResidual, BusRecord, ConverterRecord, GeneratorRecord, KktDocument, OpfSolution,
    SolutionDocument,
};

use gridopt_network::{Network, NetworkError};
use gridopt_nlp::{NlpError, SolverOptions};

#[derive(Debug, thiserror::Error)]
pub enum OpfError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Nlp(#[from] NlpError),
    #[error("region {0} has no buses")]
    EmptyScope(u32),
    #[error("network has load but no generators")]
    NoGeneration,
}

/// Assembles and solves the OPF of `net` over `scope`.
pub fn solve_opf(net: &Network, scope: Scope, opts: &SolverOptions) -> Result<(OpfProblem, OpfSolution), OpfError> {
    let problem = assemble(net, scope)?;
    let nlp = gridopt_nlp::solve(&problem, opts)?;
    let sol = OpfSolution::from_nlp(&problem, &nlp);
    Ok((problem, sol))
}
