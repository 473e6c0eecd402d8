//! Decoupling of a region-tagged network along its tie lines.
//!
//! Every tie branch `i — j` is cut at its midpoint. The half on the side of
//! `i` ends at a new auxiliary bus `m`, the half on the side of `j` at `n`,
//! and each auxiliary bus gets a zero-cost auxiliary generator standing in
//! for the power that crossed the cut. Consensus rows require equal
//! voltages and opposite injections at `m` and `n`:
//!
//! ```text
//!   AC tie:  |V|m − |V|n = 0,  ∠Vm − ∠Vn = 0,  Pm + Pn = 0,  Qm + Qn = 0
//!   DC tie:   Vm − Vn = 0,                     Pm + Pn = 0
//! ```
//!
//! Stacked over regions these rows read `Σ_k A_k x_k = 0`.

mod cut;
mod merge;

pub use cut::{partition, partition_into, UNTAGGED};
pub use merge::ReconstructError;

use gridopt_network::{BusKind, Network};
use gridopt_nlp::Triplets;
use gridopt_opf::{OpfError, OpfProblem};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum PartitionError {
    #[error(transparent)]
    Network(#[from] gridopt_network::NetworkError),
    #[error("bus {0} carries no region tag")]
    UntaggedBus(u32),
    #[error("region {0} has no buses")]
    EmptyRegion(u32),
    #[error("converter {ac_bus}-{dc_bus} joins buses of different regions")]
    ConverterSpansRegions { ac_bus: u32, dc_bus: u32 },
    #[error("region {region}: {source}")]
    Regional {
        region: u32,
        #[source]
        source: OpfError,
    },
}

/// Quantity tied together by one consensus row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CouplingKind {
    Vmag,
    Vang,
    Pgen,
    Qgen,
    Vdc,
    Pdc,
}

/// Voltage rows demand equality, power rows anti-symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CouplingClass {
    Voltage,
    Power,
}

impl CouplingKind {
    pub fn class(self) -> CouplingClass {
        match self {
            Self::Vmag | Self::Vang | Self::Vdc => CouplingClass::Voltage,
            Self::Pgen | Self::Qgen | Self::Pdc => CouplingClass::Power,
        }
    }

    /// Row kinds of a cut tie, in row order.
    pub fn for_tie(kind: BusKind) -> &'static [CouplingKind] {
        match kind {
            BusKind::Ac => &[Self::Vmag, Self::Vang, Self::Pgen, Self::Qgen],
            BusKind::Dc => &[Self::Vdc, Self::Pdc],
        }
    }

    pub fn is_dc(self) -> bool {
        matches!(self, Self::Vdc | Self::Pdc)
    }

    /// Global coefficient on the `n` side; the `m` side is always +1.
    pub fn far_coefficient(self) -> f64 {
        match self.class() {
            CouplingClass::Voltage => -1.0,
            CouplingClass::Power => 1.0,
        }
    }
}

/// One cut tie line.
#[derive(Debug, Clone, PartialEq)]
pub struct TieCut {
    /// Index of the tie in the original branch list.
    pub branch: usize,
    pub kind: BusKind,
    /// Regions of the original `from` and `to` ends.
    pub regions: (u32, u32),
    /// Original `from` and `to` bus ids.
    pub ends: (u32, u32),
    /// Auxiliary bus ids: `m` in the `from` region, `n` in the `to` region.
    pub aux_buses: (u32, u32),
    /// Auxiliary generator positions within each regional network.
    pub aux_generators: (usize, usize),
}

/// A global consensus row with its two nonzeros.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingConstraint {
    pub row: usize,
    pub tie: usize,
    pub kind: CouplingKind,
    /// `(region position, variable index, coefficient)` for `m` then `n`.
    pub terms: [(usize, usize, f64); 2],
}

/// A consensus row as seen from one region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalRow {
    pub row: usize,
    pub tie: usize,
    pub kind: CouplingKind,
    /// Variable index in this region's OPF vector.
    pub variable: usize,
    /// Coefficient of this region's term in the global row.
    pub coefficient: f64,
    /// Region position of the other end.
    pub neighbor: usize,
}

impl LocalRow {
    pub fn class(&self) -> CouplingClass {
        self.kind.class()
    }
}

/// One region's OPF with its auxiliary equipment and coupling rows.
#[derive(Debug, Clone)]
pub struct RegionalProblem {
    pub region: u32,
    pub network: Network,
    pub problem: OpfProblem,
    /// Coupling rows in global row order.
    pub rows: Vec<LocalRow>,
    /// Regional bus position → original bus position (`None` for aux buses).
    pub bus_origin: Vec<Option<usize>>,
    pub generator_origin: Vec<Option<usize>>,
    pub converter_origin: Vec<usize>,
}

impl RegionalProblem {
    /// Boundary variable indices, one per coupling row.
    pub fn boundary(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.variable).collect()
    }

    /// `A_k` with global row numbering (`total_rows` rows).
    pub fn coupling_matrix(&self, total_rows: usize) -> Triplets {
        let mut a = Triplets::with_capacity(total_rows, self.problem.map().len(), self.rows.len());
        for r in &self.rows {
            a.push(r.row, r.variable, r.coefficient);
        }
        a
    }

    /// Boundary values `x_k` restricted to the coupling rows, in row order.
    pub fn boundary_values(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| x[r.variable]).collect()
    }
}

/// The decoupled network.
#[derive(Debug, Clone)]
pub struct Partition {
    pub original: Network,
    pub regions: Vec<RegionalProblem>,
    pub ties: Vec<TieCut>,
    pub constraints: Vec<CouplingConstraint>,
}

impl Partition {
    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    pub fn region_index(&self, region: u32) -> Option<usize> {
        self.regions.iter().position(|r| r.region == region)
    }

    /// `Σ_k A_k x_k` for regional points `xs`.
    pub fn consensus_residual(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| {
                let [(ra, va, ca), (rb, vb, cb)] = c.terms;
                ca * xs[ra][va] + cb * xs[rb][vb]
            })
            .collect()
    }

    /// `‖Σ_k A_k x_k‖∞`, zero without ties.
    pub fn max_residual(&self, xs: &[Vec<f64>]) -> f64 {
        self.consensus_residual(xs).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Contracts every auxiliary pair back into one branch, restoring the
    /// original topology and parameters.
    pub fn contract(&self) -> Network {
        let mut net = Network { buses: Vec::new(), branches: Vec::new(), generators: Vec::new(), converters: Vec::new(), ..self.original.clone() };
        for rp in &self.regions {
            for (k, b) in rp.network.buses.iter().enumerate() {
                if rp.bus_origin[k].is_some() {
                    net.buses.push(b.clone());
                }
            }
            for (k, g) in rp.network.generators.iter().enumerate() {
                if rp.generator_origin[k].is_some() {
                    net.generators.push(g.clone());
                }
            }
            net.converters.extend(rp.network.converters.iter().cloned());
        }
        let aux: std::collections::HashSet<u32> =
            self.ties.iter().flat_map(|t| [t.aux_buses.0, t.aux_buses.1]).collect();
        for rp in &self.regions {
            for br in &rp.network.branches {
                if !aux.contains(&br.from) && !aux.contains(&br.to) {
                    net.branches.push(br.clone());
                }
            }
        }
        for tie in &self.ties {
            let half = |region: u32, aux_bus: u32| {
                let rp = &self.regions[self.region_index(region).expect("tie region")];
                rp.network
                    .branches
                    .iter()
                    .find(|b| b.from == aux_bus || b.to == aux_bus)
                    .expect("half branch")
                    .clone()
            };
            let a = half(tie.regions.0, tie.aux_buses.0);
            let b = half(tie.regions.1, tie.aux_buses.1);
            net.branches.push(gridopt_network::Branch {
                from: tie.ends.0,
                to: tie.ends.1,
                r: a.r + b.r,
                x: a.x + b.x,
                b_from: a.b_from,
                b_to: b.b_to,
            });
        }
        net
    }

    pub fn report(&self) -> PartitionReport {
        PartitionReport {
            regions: self
                .regions
                .iter()
                .map(|rp| RegionReport {
                    region: rp.region,
                    buses: rp.bus_origin.iter().filter(|o| o.is_some()).count(),
                    auxiliary_buses: rp.bus_origin.iter().filter(|o| o.is_none()).count(),
                    branches: rp.network.branches.len(),
                    generators: rp.generator_origin.iter().filter(|o| o.is_some()).count(),
                    converters: rp.network.converters.len(),
                    coupling_rows: rp.rows.len(),
                })
                .collect(),
            ac_ties: self.ties.iter().filter(|t| t.kind == BusKind::Ac).count(),
            dc_ties: self.ties.iter().filter(|t| t.kind == BusKind::Dc).count(),
            ties: self
                .ties
                .iter()
                .map(|t| TieReport { from: t.ends.0, to: t.ends.1, kind: t.kind.as_str(), regions: t.regions })
                .collect(),
            consensus_rows: self.num_rows(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionReport {
    pub regions: Vec<RegionReport>,
    pub ac_ties: usize,
    pub dc_ties: usize,
    pub ties: Vec<TieReport>,
    pub consensus_rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionReport {
    pub region: u32,
    pub buses: usize,
    pub auxiliary_buses: usize,
    pub branches: usize,
    pub generators: usize,
    pub converters: usize,
    pub coupling_rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TieReport {
    pub from: u32,
    pub to: u32,
    pub kind: &'static str,
    pub regions: (u32, u32),
}

impl std::fmt::Display for PartitionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{} regions, {} AC and {} DC tie lines, {} consensus rows",
            self.regions.len(),
            self.ac_ties,
            self.dc_ties,
            self.consensus_rows
        )?;
        for r in &self.regions {
            writeln!(
                f,
                "  region {:>3}: {} buses (+{} aux), {} branches, {} generators, {} converters",
                r.region, r.buses, r.auxiliary_buses, r.branches, r.generators, r.converters
            )?;
        }
        Ok(())
    }
}
