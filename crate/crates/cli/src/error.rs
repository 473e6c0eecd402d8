use std::path::PathBuf;

use gridopt_admm::AdmmError;
use gridopt_nlp::SolveStatus;
use gridopt_opf::OpfError;
use gridopt_partition::PartitionError;

/// Error classes, each with its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Parse,
    Infeasible,
    NoConvergence,
    Config,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Parse => 3,
            Self::Infeasible => 4,
            Self::NoConvergence => 5,
            Self::Config => 6,
            Self::Io => 7,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Parse => "parse",
            Self::Infeasible => "infeasible",
            Self::NoConvergence => "no-convergence",
            Self::Config => "config",
            Self::Io => "io",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Case {
        path: PathBuf,
        #[source]
        source: gridopt_network::NetworkError,
    },
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Opf(#[from] OpfError),
    #[error("solver stopped with {0:?}")]
    Status(SolveStatus),
    #[error(transparent)]
    Admm(#[from] AdmmError),
    #[error("no consensus after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

fn status_class(status: SolveStatus) -> ErrorClass {
    match status {
        SolveStatus::Infeasible => ErrorClass::Infeasible,
        _ => ErrorClass::NoConvergence,
    }
}

impl CliError {
    pub fn class(&self) -> ErrorClass {
        match self {
            Self::Read { .. } | Self::Case { .. } => ErrorClass::Parse,
            Self::Write { .. } => ErrorClass::Io,
            Self::Config(_) => ErrorClass::Config,
            Self::Partition(PartitionError::Regional { .. }) => ErrorClass::Infeasible,
            Self::Partition(_) => ErrorClass::Parse,
            Self::Opf(OpfError::Network(_)) => ErrorClass::Parse,
            Self::Opf(_) => ErrorClass::Infeasible,
            Self::Status(s) => status_class(*s),
            Self::Admm(e) => match e {
                AdmmError::Config(_) => ErrorClass::Config,
                AdmmError::RegionFailed { status, .. } | AdmmError::CoupledFailed { status } => status_class(*status),
                AdmmError::Transport(_) => ErrorClass::Io,
                _ => ErrorClass::Infeasible,
            },
            Self::NoConvergence { .. } => ErrorClass::NoConvergence,
        }
    }
}
