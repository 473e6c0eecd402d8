//! Run harness behind the `gridopt` binary: centralized and distributed
//! solves, `(ρ0, τ)` sweeps, and their output files.
//!
//! A run directory holds `manifest.json` (the inputs), `solution.json`,
//! `summary.json` and, for distributed runs, `trace.csv`. A sweep directory
//! holds its manifest and `sweep.csv`.

mod error;
mod manifest;
mod solve;
mod sweep;

pub use error::{CliError, ErrorClass};
pub use manifest::{AdmmParams, Mode, RunManifest, TransportKind};
pub use solve::{cmd_solve, gap, load_case, solve, write_outputs, SolveOutput, Summary};
pub use sweep::{cmd_sweep, format_table, sweep, write_sweep_csv, SweepCell, SweepManifest};
