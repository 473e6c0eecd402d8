use gridopt_network::{build_ac_admittance, build_dc_admittance, BusKind, Network};
use gridopt_nlp::{KktResiduals, NlpSolution, SolveStatus};
use num_complex::Complex64;
use serde::Serialize;

use crate::problem::OpfProblem;

/// OPF result in network terms, per-unit.
///
/// Bus vectors are indexed by bus position in the network; `va` is zero for
/// DC buses. Generator `qg` is zero for units on DC buses.
#[derive(Debug, Clone, PartialEq)]
pub struct OpfSolution {
    pub vm: Vec<f64>,
    pub va: Vec<f64>,
    pub pg: Vec<f64>,
    pub qg: Vec<f64>,
    pub pc: Vec<f64>,
    pub qc: Vec<f64>,
    pub p_loss: Vec<f64>,
    /// Generation cost in currency per hour, auxiliary units excluded.
    pub objective: f64,
    pub status: SolveStatus,
    pub kkt: KktResiduals,
    pub iterations: usize,
    pub eq_multipliers: Vec<f64>,
    pub ineq_multipliers: Vec<f64>,
}

impl OpfSolution {
    /// Maps an NLP point back to network quantities.
    pub fn from_point(problem: &OpfProblem, x: &[f64]) -> Self {
        let net = problem.network();
        let map = problem.map();
        let mut vm = vec![0.0; net.buses.len()];
        let mut va = vec![0.0; net.buses.len()];
        for (b, bus) in net.buses.iter().enumerate() {
            vm[b] = x[map.voltage(b)];
            if bus.kind == BusKind::Ac {
                va[b] = x[map.va(b)];
            }
        }
        let pg = (0..net.generators.len()).map(|g| x[map.pg(g)]).collect();
        let qg = (0..net.generators.len())
            .map(|g| map.qg(g).map_or(0.0, |k| x[k]))
            .collect();
        let pc: Vec<f64> = (0..net.converters.len()).map(|c| x[map.pc(c)]).collect();
        let qc: Vec<f64> = (0..net.converters.len()).map(|c| x[map.qc(c)]).collect();
        let p_loss = net
            .converters
            .iter()
            .enumerate()
            .map(|(c, conv)| conv.loss(pc[c], qc[c]))
            .collect();
        Self {
            vm,
            va,
            pg,
            qg,
            pc,
            qc,
            p_loss,
            objective: problem.cost(x),
            status: SolveStatus::Converged,
            kkt: KktResiduals::default(),
            iterations: 0,
            eq_multipliers: Vec::new(),
            ineq_multipliers: Vec::new(),
        }
    }

    pub fn from_nlp(problem: &OpfProblem, sol: &NlpSolution) -> Self {
        let mut s = Self::from_point(problem, &sol.x);
        s.status = sol.status;
        s.kkt = sol.kkt;
        s.iterations = sol.iterations;
        s.eq_multipliers = sol.eq_multipliers.clone();
        s.ineq_multipliers = sol.ineq_multipliers.clone();
        s
    }

    /// NLP point corresponding to this solution.
    pub fn to_point(&self, problem: &OpfProblem) -> Vec<f64> {
        let net = problem.network();
        let map = problem.map();
        let mut x = vec![0.0; map.len()];
        for (b, bus) in net.buses.iter().enumerate() {
            x[map.voltage(b)] = self.vm[b];
            if bus.kind == BusKind::Ac {
                x[map.va(b)] = self.va[b];
            }
        }
        for g in 0..net.generators.len() {
            x[map.pg(g)] = self.pg[g];
            if let Some(k) = map.qg(g) {
                x[k] = self.qg[g];
            }
        }
        for c in 0..net.converters.len() {
            x[map.pc(c)] = self.pc[c];
            x[map.qc(c)] = self.qc[c];
        }
        x
    }

    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// Result document with per-device records in MW / Mvar and degrees.
    pub fn document(&self, net: &Network) -> SolutionDocument {
        let base = net.base_mva;
        SolutionDocument {
            objective: self.objective,
            status: format!("{:?}", self.status),
            iterations: self.iterations,
            kkt: KktDocument {
                stationarity: self.kkt.stationarity,
                feasibility: self.kkt.feasibility,
                complementarity: self.kkt.complementarity,
            },
            base_mva: base,
            buses: net
                .buses
                .iter()
                .enumerate()
                .map(|(b, bus)| BusRecord {
                    id: bus.id,
                    kind: bus.kind.as_str(),
                    region: bus.region,
                    vm: self.vm[b],
                    va_deg: self.va[b].to_degrees(),
                })
                .collect(),
            generators: net
                .generators
                .iter()
                .enumerate()
                .map(|(g, gen)| GeneratorRecord {
                    bus: gen.bus,
                    auxiliary: gen.is_auxiliary,
                    p_mw: self.pg[g] * base,
                    q_mvar: self.qg[g] * base,
                })
                .collect(),
            converters: net
                .converters
                .iter()
                .enumerate()
                .map(|(c, conv)| ConverterRecord {
                    ac_bus: conv.ac_bus,
                    dc_bus: conv.dc_bus,
                    p_mw: self.pc[c] * base,
                    q_mvar: self.qc[c] * base,
                    loss_mw: self.p_loss[c] * base,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionDocument {
    /// Currency per hour.
    pub objective: f64,
    pub status: String,
    pub iterations: usize,
    pub kkt: KktDocument,
    pub base_mva: f64,
    pub buses: Vec<BusRecord>,
    pub generators: Vec<GeneratorRecord>,
    pub converters: Vec<ConverterRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KktDocument {
    pub stationarity: f64,
    pub feasibility: f64,
    pub complementarity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BusRecord {
    pub id: u32,
    pub kind: &'static str,
    pub region: u32,
    /// Voltage magnitude in pu.
    pub vm: f64,
    pub va_deg: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorRecord {
    pub bus: u32,
    pub auxiliary: bool,
    pub p_mw: f64,
    pub q_mvar: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConverterRecord {
    pub ac_bus: u32,
    pub dc_bus: u32,
    /// Positive from DC to AC.
    pub p_mw: f64,
    pub q_mvar: f64,
    pub loss_mw: f64,
}

/// Left-minus-right of the nodal balance equations, per-unit.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceResidual {
    /// Per AC bus in network order.
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Per DC bus in network order.
    pub dc: Vec<f64>,
}

impl BalanceResidual {
    pub fn max_abs(&self) -> f64 {
        self.p
            .iter()
            .chain(&self.q)
            .chain(&self.dc)
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Evaluates the nodal balances of `sol` on `net` with complex arithmetic,
/// independently of the NLP assembly.
///
/// AC: `Re/Im(V_i Σ_l (Y_il V_l)*) − (P_G + P_C − P_D)`.
/// DC: `V_j Σ_l Y_jl V_l + (P_C + P_CL) − P_G + P_D`.
pub fn evaluate_balance(net: &Network, sol: &OpfSolution) -> BalanceResidual {
    let lookup = net.bus_lookup();
    let yac = build_ac_admittance(net);
    let ac_ids = &yac.bus_ids;
    let v: Vec<Complex64> = ac_ids
        .iter()
        .map(|id| {
            let b = lookup[id];
            Complex64::from_polar(sol.vm[b], sol.va[b])
        })
        .collect();
    let mut current = vec![Complex64::new(0.0, 0.0); v.len()];
    for (i, j, y) in yac.iter() {
        current[i] += y * v[j];
    }
    let mut p = Vec::with_capacity(v.len());
    let mut q = Vec::with_capacity(v.len());
    let ac_index: std::collections::HashMap<u32, usize> = ac_ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
    let mut inj = vec![Complex64::new(0.0, 0.0); v.len()];
    for (g, gen) in net.generators.iter().enumerate() {
        if let Some(&k) = ac_index.get(&gen.bus) {
            inj[k] += Complex64::new(sol.pg[g], sol.qg[g]);
        }
    }
    for (c, conv) in net.converters.iter().enumerate() {
        inj[ac_index[&conv.ac_bus]] += Complex64::new(sol.pc[c], sol.qc[c]);
    }
    for (k, id) in ac_ids.iter().enumerate() {
        let bus = &net.buses[lookup[id]];
        let s = v[k] * current[k].conj();
        let rhs = inj[k] - Complex64::new(bus.p_load, bus.q_load);
        p.push(s.re - rhs.re);
        q.push(s.im - rhs.im);
    }

    let ydc = build_dc_admittance(net);
    let dc_index: std::collections::HashMap<u32, usize> =
        ydc.bus_ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
    let vd: Vec<f64> = ydc.bus_ids.iter().map(|id| sol.vm[lookup[id]]).collect();
    let mut dc: Vec<f64> = ydc.bus_ids.iter().map(|id| net.buses[lookup[id]].p_load).collect();
    for (i, j, g) in ydc.iter() {
        dc[i] += vd[i] * g * vd[j];
    }
    for (g, gen) in net.generators.iter().enumerate() {
        if let Some(&k) = dc_index.get(&gen.bus) {
            dc[k] -= sol.pg[g];
        }
    }
    for (c, conv) in net.converters.iter().enumerate() {
        dc[dc_index[&conv.dc_bus]] += sol.pc[c] + conv.loss(sol.pc[c], sol.qc[c]);
    }
    BalanceResidual { p, q, dc }
}
