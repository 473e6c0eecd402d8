//! Hybrid AC-DC network model.
//!
//! All quantities held by [`Network`] are per-unit on `base_mva`, except
//! generator cost coefficients (currency per MWh) and `a_q`.

mod admittance;
mod case;
pub mod fixtures;
mod model;

pub use admittance::{build_ac_admittance, build_dc_admittance, BusMatrix};
pub use case::{parse_case, serialize_case, FORMAT_NAME, FORMAT_VERSION};
pub use model::{
    default_loss_c0, default_loss_c2, Branch, Bus, BusKind, Converter, Generator, Network,
};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NetworkError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unsupported case-file version {0}")]
    UnsupportedVersion(u32),
    #[error("duplicate bus id {0}")]
    DuplicateBus(u32),
    #[error("{what} references unknown bus {id}")]
    DanglingBus { what: &'static str, id: u32 },
    #[error("branch {from}-{to} joins buses of different kinds")]
    BranchKindMismatch { from: u32, to: u32 },
    #[error("converter {ac_bus}-{dc_bus} must join one AC and one DC bus")]
    ConverterKinds { ac_bus: u32, dc_bus: u32 },
    #[error("generator at DC bus {0}")]
    GeneratorOnDc(u32),
    #[error("DC bus {0} carries reactive load or shunt")]
    ReactiveOnDc(u32),
    #[error("island containing bus {0} has no reference bus")]
    MissingReference(u32),
    #[error("buses {0} and {1} are both references of one island")]
    DuplicateReference(u32, u32),
    #[error("bus {0} is not connected to the rest of the network")]
    Disconnected(u32),
    #[error("invalid value: {0}")]
    InvalidValue(String),
}
