use gridopt_network::BusKind;
use gridopt_nlp::{KktResiduals, NlpProblem};
use gridopt_opf::OpfSolution;
use num_complex::Complex64;

use crate::{CouplingKind, Partition};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReconstructError {
    #[error("expected {expected} regional solutions, got {got}")]
    RegionCount { expected: usize, got: usize },
    #[error("consensus row {row} ({kind:?} of tie {tie}) misses by {residual:e}, above {tolerance:e}")]
    Mismatch {
        row: usize,
        tie: usize,
        kind: CouplingKind,
        residual: f64,
        tolerance: f64,
    },
}

impl Partition {
    /// Regional points equivalent to a solution of the original network.
    ///
    /// Auxiliary buses take the midpoint voltage of their tie and auxiliary
    /// generators the power flowing through the midpoint, so the consensus
    /// rows hold exactly.
    pub fn split_points(&self, central: &OpfSolution) -> Vec<Vec<f64>> {
        let net = &self.original;
        let lookup = net.bus_lookup();
        let mut sols: Vec<OpfSolution> = self
            .regions
            .iter()
            .map(|rp| {
                let nb = rp.network.buses.len();
                let ng = rp.network.generators.len();
                let mut s = OpfSolution::from_point(&rp.problem, &rp.problem.initial_point());
                s.vm = vec![0.0; nb];
                s.va = vec![0.0; nb];
                s.pg = vec![0.0; ng];
                s.qg = vec![0.0; ng];
                for (k, o) in rp.bus_origin.iter().enumerate() {
                    if let Some(b) = *o {
                        s.vm[k] = central.vm[b];
                        s.va[k] = central.va[b];
                    }
                }
                for (k, o) in rp.generator_origin.iter().enumerate() {
                    if let Some(g) = *o {
                        s.pg[k] = central.pg[g];
                        s.qg[k] = central.qg[g];
                    }
                }
                for (k, &c) in rp.converter_origin.iter().enumerate() {
                    s.pc[k] = central.pc[c];
                    s.qc[k] = central.qc[c];
                }
                s
            })
            .collect();

        for tie in &self.ties {
            let br = &net.branches[tie.branch];
            let (i, j) = (lookup[&tie.ends.0], lookup[&tie.ends.1]);
            let (vm, va, p, q) = match tie.kind {
                BusKind::Ac => {
                    let vi = Complex64::from_polar(central.vm[i], central.va[i]);
                    let vj = Complex64::from_polar(central.vm[j], central.va[j]);
                    let z = Complex64::new(br.r, br.x);
                    let current = (vi - vj) / z;
                    let mid = (vi + vj) * 0.5;
                    let s = mid * (-current).conj();
                    (mid.norm(), mid.arg(), s.re, s.im)
                }
                BusKind::Dc => {
                    let (vi, vj) = (central.vm[i], central.vm[j]);
                    let mid = 0.5 * (vi + vj);
                    (mid, 0.0, mid * (mid - vi) * 2.0 / br.r, 0.0)
                }
            };
            let sides = [
                (tie.regions.0, tie.aux_buses.0, tie.aux_generators.0, 1.0),
                (tie.regions.1, tie.aux_buses.1, tie.aux_generators.1, -1.0),
            ];
            for (region, aux_bus, aux_gen, sign) in sides {
                let rk = self.region_index(region).expect("tie region");
                let b = self.regions[rk].network.buses.iter().position(|b| b.id == aux_bus).expect("aux bus");
                let s = &mut sols[rk];
                s.vm[b] = vm;
                s.va[b] = va;
                s.pg[aux_gen] = sign * p;
                s.qg[aux_gen] = sign * q;
            }
        }
        sols.iter()
            .zip(&self.regions)
            .map(|(s, rp)| s.to_point(&rp.problem))
            .collect()
    }

    /// [`split_points`](Self::split_points) as regional solutions carrying the
    /// status of `central`.
    pub fn split(&self, central: &OpfSolution) -> Vec<OpfSolution> {
        self.split_points(central)
            .iter()
            .zip(&self.regions)
            .map(|(x, rp)| {
                let mut s = OpfSolution::from_point(&rp.problem, x);
                s.status = central.status;
                s.kkt = central.kkt;
                s
            })
            .collect()
    }

    /// Merges regional solutions into one solution of the original network.
    ///
    /// Refuses when any consensus row misses by more than `tolerance`.
    /// Auxiliary equipment is dropped; the objective is the sum of regional
    /// objectives, which exclude auxiliary generators.
    pub fn reconstruct(&self, sols: &[OpfSolution], tolerance: f64) -> Result<OpfSolution, ReconstructError> {
        if sols.len() != self.regions.len() {
            return Err(ReconstructError::RegionCount { expected: self.regions.len(), got: sols.len() });
        }
        let xs: Vec<Vec<f64>> = sols.iter().zip(&self.regions).map(|(s, rp)| s.to_point(&rp.problem)).collect();
        let residual = self.consensus_residual(&xs);
        if let Some((row, r)) = residual
            .iter()
            .enumerate()
            .filter(|(_, r)| !(r.abs() <= tolerance))
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        {
            let c = &self.constraints[row];
            return Err(ReconstructError::Mismatch { row, tie: c.tie, kind: c.kind, residual: *r, tolerance });
        }

        let net = &self.original;
        let mut merged = OpfSolution {
            vm: vec![0.0; net.buses.len()],
            va: vec![0.0; net.buses.len()],
            pg: vec![0.0; net.generators.len()],
            qg: vec![0.0; net.generators.len()],
            pc: vec![0.0; net.converters.len()],
            qc: vec![0.0; net.converters.len()],
            p_loss: vec![0.0; net.converters.len()],
            objective: 0.0,
            status: gridopt_nlp::SolveStatus::Converged,
            kkt: KktResiduals::default(),
            iterations: 0,
            eq_multipliers: Vec::new(),
            ineq_multipliers: Vec::new(),
        };
        for (s, rp) in sols.iter().zip(&self.regions) {
            for (k, o) in rp.bus_origin.iter().enumerate() {
                if let Some(b) = *o {
                    merged.vm[b] = s.vm[k];
                    merged.va[b] = s.va[k];
                }
            }
            for (k, o) in rp.generator_origin.iter().enumerate() {
                if let Some(g) = *o {
                    merged.pg[g] = s.pg[k];
                    merged.qg[g] = s.qg[k];
                }
            }
            for (k, &c) in rp.converter_origin.iter().enumerate() {
                merged.pc[c] = s.pc[k];
                merged.qc[c] = s.qc[k];
                merged.p_loss[c] = s.p_loss[k];
            }
            merged.objective += s.objective;
            if !s.converged() && merged.converged() {
                merged.status = s.status;
            }
            merged.kkt.stationarity = merged.kkt.stationarity.max(s.kkt.stationarity);
            merged.kkt.feasibility = merged.kkt.feasibility.max(s.kkt.feasibility);
            merged.kkt.complementarity = merged.kkt.complementarity.max(s.kkt.complementarity);
            merged.iterations = merged.iterations.max(s.iterations);
        }
        Ok(merged)
    }
}
