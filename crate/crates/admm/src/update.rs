//! The per-iteration update rules, free of any coordination state.

use gridopt_partition::CouplingClass;

use crate::message::Message;
use crate::AdmmError;

/// Consensus target of one row from the own and the neighbor's value:
/// the mean for voltages, the half-difference for powers.
pub fn consensus_target(class: CouplingClass, own: f64, neighbor: f64) -> f64 {
    match class {
        CouplingClass::Voltage => 0.5 * (own + neighbor),
        CouplingClass::Power => 0.5 * (own - neighbor),
    }
}

/// Mismatch of one row as seen from both ends.
pub fn pair_mismatch(class: CouplingClass, own: f64, neighbor: f64) -> f64 {
    match class {
        CouplingClass::Voltage => own - neighbor,
        CouplingClass::Power => own + neighbor,
    }
}

/// Targets for the rows of one tie and class.
///
/// Both messages must belong to `iteration`, the same tie and class, and have
/// equal length.
pub fn update_z(iteration: u64, own: &Message, neighbor: &Message) -> Result<Vec<f64>, AdmmError> {
    for m in [own, neighbor] {
        if m.iteration != iteration {
            return Err(AdmmError::StaleMessage { expected: iteration, got: m.iteration, sender: m.sender });
        }
    }
    if own.tie != neighbor.tie || own.class != neighbor.class || own.values.len() != neighbor.values.len() {
        return Err(AdmmError::MessageMismatch { tie: own.tie });
    }
    Ok(own
        .values
        .iter()
        .zip(&neighbor.values)
        .map(|(&a, &b)| consensus_target(own.class, a, b))
        .collect())
}

/// `λ ← λ + ρ W (x − z)` row by row.
pub fn update_duals(lambda: &mut [f64], rho: f64, weights: &[f64], x: &[f64], z: &[f64]) {
    for (r, l) in lambda.iter_mut().enumerate() {
        *l += rho * weights[r] * (x[r] - z[r]);
    }
}

/// `‖x − z‖∞`, zero for no rows.
pub fn local_residual(x: &[f64], z: &[f64]) -> f64 {
    x.iter().zip(z).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// Whether the penalty must grow: the new residual did not drop to `Θ`
/// times the previous one. `Γ = ∞` never triggers growth, nor does
/// `Γ = Γ⁺ = 0`.
pub fn penalty_must_grow(theta: f64, previous: f64, current: f64) -> bool {
    !(current <= theta * previous)
}

/// `(ρ, Γ)` after one step of the penalty rule.
pub fn update_penalty(rho: f64, tau: f64, theta: f64, previous: f64, current: f64) -> (f64, f64) {
    if penalty_must_grow(theta, previous, current) {
        (tau * rho, current)
    } else {
        (rho, current)
    }
}
