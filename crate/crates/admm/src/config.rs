use gridopt_nlp::SolverOptions;
use gridopt_partition::{CouplingClass, CouplingKind};

/// Diagonal entries of the weighting matrix `W` by row class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub voltage: f64,
    pub power_ac: f64,
    pub power_dc: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self { voltage: 100.0, power_ac: 1.0, power_dc: 10.0 }
    }
}

impl Weights {
    pub fn of(&self, kind: CouplingKind) -> f64 {
        match (kind.class(), kind.is_dc()) {
            (CouplingClass::Voltage, _) => self.voltage,
            (CouplingClass::Power, false) => self.power_ac,
            (CouplingClass::Power, true) => self.power_dc,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdmmConfig {
    /// Initial penalty `ρ0`.
    pub rho0: f64,
    /// Penalty growth factor `τ`.
    pub tau: f64,
    /// Required residual decrease `Θ`.
    pub theta: f64,
    /// Tolerance on `‖Σ A_k x_k‖∞`.
    pub eps: f64,
    pub weights: Weights,
    pub max_iterations: usize,
    /// Solve regions on separate threads.
    pub parallel: bool,
    pub solver: SolverOptions,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            rho0: 100.0,
            tau: 1.1,
            theta: 0.99,
            eps: 1e-3,
            weights: Weights::default(),
            max_iterations: 500,
            parallel: true,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("rho0 must be positive, got {0}")]
    Rho0(f64),
    #[error("tau must exceed 1, got {0}")]
    Tau(f64),
    #[error("theta must lie in (0, 1), got {0}")]
    Theta(f64),
    #[error("eps must be positive, got {0}")]
    Eps(f64),
    #[error("weights must be positive, got {0:?}")]
    Weights(Weights),
    #[error("max_iterations must be positive")]
    MaxIterations,
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        // Negated comparisons also reject NaN.
        if !(self.rho0 > 0.0 && self.rho0.is_finite()) {
            return Err(ConfigError::Rho0(self.rho0));
        }
        if !(self.tau > 1.0 && self.tau.is_finite()) {
            return Err(ConfigError::Tau(self.tau));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(ConfigError::Theta(self.theta));
        }
        if !(self.eps > 0.0) {
            return Err(ConfigError::Eps(self.eps));
        }
        let w = self.weights;
        if ![w.voltage, w.power_ac, w.power_dc].iter().all(|v| *v > 0.0 && v.is_finite()) {
            return Err(ConfigError::Weights(w));
        }
        if self.max_iterations == 0 {
            return Err(ConfigError::MaxIterations);
        }
        Ok(())
    }

    /// `ρ0 · τ^m`.
    pub fn penalty(&self, steps: u32) -> f64 {
        self.rho0 * self.tau.powi(steps as i32)
    }
}
