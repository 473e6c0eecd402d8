//! Consensus ADMM over regional OPF subproblems.
//!
//! Each iteration solves every region's OPF augmented with
//! `λ_kᵀ x_k + ρ_k/2 ‖x_k − z_k‖²_W` on its coupling rows, exchanges the
//! boundary values with the neighbors across each tie, and updates
//!
//! ```text
//!   z  ← ½(own + neighbor)    voltage rows
//!   z  ← ½(own − neighbor)    power rows
//!   λ  ← λ + ρ W (x − z)
//!   ρ  ← τ ρ   unless ‖x − z‖∞ ≤ Θ Γ,   Γ ← ‖x − z‖∞
//! ```
//!
//! until `‖Σ_k A_k x_k‖∞ ≤ ε`. Rows are stored in each region's own sign:
//! the boundary value enters with coefficient +1.

mod augmented;
mod config;
mod coordinator;
pub mod message;
mod trace;
pub mod transport;
pub mod update;

pub use augmented::{AugmentedProblem, CoupledProblem};
pub use config::{AdmmConfig, ConfigError, Weights};
pub use coordinator::{message_residual, run, AdmmResult, Coordinator, RegionState, RegionWorker, StepOutcome};
pub use message::Message;
pub use trace::{IterationRecord, IterationTrace};
pub use transport::{InProcTransport, Routes, SocketTransport, Transport, TransportError};

use gridopt_nlp::{NlpError, SolveStatus};
use gridopt_partition::ReconstructError;

#[derive(Debug, thiserror::Error)]
pub enum AdmmError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("message from region {sender} belongs to iteration {got}, expected {expected}")]
    StaleMessage { expected: u64, got: u64, sender: u32 },
    #[error("messages for tie {tie} do not pair up")]
    MessageMismatch { tie: u32 },
    #[error("region {region} received nothing for tie {tie}")]
    MissingMessage { region: u32, tie: u32 },
    #[error("region {region}: {source}")]
    RegionSolver {
        region: u32,
        #[source]
        source: NlpError,
    },
    #[error("region {region}: subproblem ended with {status:?}")]
    RegionFailed { region: u32, status: SolveStatus },
    #[error("coupled problem: {source}")]
    CoupledSolver {
        #[source]
        source: NlpError,
    },
    #[error("coupled problem ended with {status:?}")]
    CoupledFailed { status: SolveStatus },
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
}
