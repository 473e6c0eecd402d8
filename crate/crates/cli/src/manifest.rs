use std::path::PathBuf;

use gridopt_admm::{AdmmConfig, Weights};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Central,
    Distributed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TransportKind {
    Inproc,
    Socket,
}

/// ADMM parameters as given on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmParams {
    pub rho0: f64,
    pub tau: f64,
    pub theta: f64,
    pub eps: f64,
    pub w_voltage: f64,
    pub w_power_ac: f64,
    pub w_power_dc: f64,
    pub max_iterations: usize,
}

impl Default for AdmmParams {
    fn default() -> Self {
        let c = AdmmConfig::default();
        Self {
            rho0: c.rho0,
            tau: c.tau,
            theta: c.theta,
            eps: c.eps,
            w_voltage: c.weights.voltage,
            w_power_ac: c.weights.power_ac,
            w_power_dc: c.weights.power_dc,
            max_iterations: c.max_iterations,
        }
    }
}

impl AdmmParams {
    pub fn to_config(&self) -> AdmmConfig {
        AdmmConfig {
            rho0: self.rho0,
            tau: self.tau,
            theta: self.theta,
            eps: self.eps,
            weights: Weights { voltage: self.w_voltage, power_ac: self.w_power_ac, power_dc: self.w_power_dc },
            max_iterations: self.max_iterations,
            ..AdmmConfig::default()
        }
    }
}

/// Everything needed to repeat a run; written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub case: PathBuf,
    pub mode: Mode,
    pub transport: TransportKind,
    pub admm: AdmmParams,
    pub compare_central: bool,
    pub out: Option<PathBuf>,
    /// Recorded for reproducibility; the solvers themselves draw no random
    /// numbers.
    pub seed: u64,
}

impl RunManifest {
    pub fn new(case: impl Into<PathBuf>, mode: Mode) -> Self {
        Self {
            case: case.into(),
            mode,
            transport: TransportKind::Inproc,
            admm: AdmmParams::default(),
            compare_central: false,
            out: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.mode == Mode::Central && self.transport == TransportKind::Socket {
            return Err(CliError::Config("the socket transport needs --mode distributed".into()));
        }
        if self.mode == Mode::Distributed {
            self.admm.to_config().validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }
}
