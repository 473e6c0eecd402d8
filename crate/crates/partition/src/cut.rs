use std::collections::{BTreeSet, HashMap};

use gridopt_network::{Branch, Bus, BusKind, Generator, Network};
use gridopt_opf::OpfProblem;

use crate::{CouplingConstraint, CouplingKind, LocalRow, Partition, PartitionError, RegionalProblem, TieCut};

/// Region tag reserved for buses that belong to no region.
pub const UNTAGGED: u32 = 0;

/// Partitions `net` along its tie lines, one region per distinct bus tag.
pub fn partition(net: &Network) -> Result<Partition, PartitionError> {
    partition_into(net, &net.regions())
}

/// Partitions `net` into exactly the listed regions. Every bus must carry one
/// of the listed tags and every listed region must own at least one bus.
pub fn partition_into(net: &Network, regions: &[u32]) -> Result<Partition, PartitionError> {
    let wanted: BTreeSet<u32> = regions.iter().copied().collect();
    net.validate()?;
    for b in &net.buses {
        if b.region == UNTAGGED || !wanted.contains(&b.region) {
            return Err(PartitionError::UntaggedBus(b.id));
        }
    }
    for &r in &wanted {
        if !net.buses.iter().any(|b| b.region == r) {
            return Err(PartitionError::EmptyRegion(r));
        }
    }
    let lookup = net.bus_lookup();
    let region_of = |id: u32| net.buses[lookup[&id]].region;
    for c in &net.converters {
        if region_of(c.ac_bus) != region_of(c.dc_bus) {
            return Err(PartitionError::ConverterSpansRegions { ac_bus: c.ac_bus, dc_bus: c.dc_bus });
        }
    }
    let order: Vec<u32> = wanted.into_iter().collect();
    let pos_of: HashMap<u32, usize> = order.iter().enumerate().map(|(k, &r)| (r, k)).collect();

    struct Draft {
        net: Network,
        bus_origin: Vec<Option<usize>>,
        generator_origin: Vec<Option<usize>>,
        converter_origin: Vec<usize>,
    }
    let mut drafts: Vec<Draft> = order
        .iter()
        .map(|&r| {
            let mut d = Draft {
                net: Network {
                    buses: Vec::new(),
                    branches: Vec::new(),
                    generators: Vec::new(),
                    converters: Vec::new(),
                    ..net.clone()
                },
                bus_origin: Vec::new(),
                generator_origin: Vec::new(),
                converter_origin: Vec::new(),
            };
            for (k, b) in net.buses.iter().enumerate().filter(|(_, b)| b.region == r) {
                d.net.buses.push(b.clone());
                d.bus_origin.push(Some(k));
            }
            for br in &net.branches {
                if region_of(br.from) == r && region_of(br.to) == r {
                    d.net.branches.push(br.clone());
                }
            }
            for (k, g) in net.generators.iter().enumerate().filter(|(_, g)| region_of(g.bus) == r) {
                d.net.generators.push(g.clone());
                d.generator_origin.push(Some(k));
            }
            for (k, c) in net.converters.iter().enumerate().filter(|(_, c)| region_of(c.ac_bus) == r) {
                d.net.converters.push(c.clone());
                d.converter_origin.push(k);
            }
            d
        })
        .collect();

    let interchange_bound = |r: u32| {
        let load: f64 = net.buses.iter().filter(|b| b.region == r).map(|b| b.p_load.abs()).sum();
        let cap: f64 = net
            .generators
            .iter()
            .filter(|g| region_of(g.bus) == r)
            .map(|g| g.p_max.abs())
            .sum();
        1.1 * load.max(cap)
    };
    let system_bound = {
        let load: f64 = net.buses.iter().map(|b| b.p_load.abs()).sum();
        let cap: f64 = net.generators.iter().map(|g| g.p_max.abs()).sum();
        1.1 * load.max(cap)
    };

    let next_id = net.buses.iter().map(|b| b.id).max().unwrap_or(0) + 1;
    let mut ties = Vec::new();
    for (t, k) in net.tie_branches().into_iter().enumerate() {
        let br = &net.branches[k];
        let (bi, bj) = (&net.buses[lookup[&br.from]], &net.buses[lookup[&br.to]]);
        let kind = bi.kind;
        let (m, n) = (next_id + 2 * t as u32, next_id + 2 * t as u32 + 1);
        let v_min = 0.8 * bi.v_min.min(bj.v_min);
        let v_max = 1.2 * bi.v_max.max(bj.v_max);
        let mut gens = [0usize; 2];
        for (side, (aux, region)) in [(m, bi.region), (n, bj.region)].into_iter().enumerate() {
            let d = &mut drafts[pos_of[&region]];
            d.net.buses.push(Bus {
                id: aux,
                kind,
                v_min,
                v_max,
                is_ref: false,
                region,
                p_load: 0.0,
                q_load: 0.0,
                gs: 0.0,
                bs: 0.0,
            });
            d.bus_origin.push(None);
            // Each half keeps the charging of its surviving end.
            d.net.branches.push(if side == 0 {
                Branch { from: br.from, to: aux, r: br.r / 2.0, x: br.x / 2.0, b_from: br.b_from, b_to: 0.0 }
            } else {
                Branch { from: aux, to: br.to, r: br.r / 2.0, x: br.x / 2.0, b_from: 0.0, b_to: br.b_to }
            });
            let mut bound = interchange_bound(region);
            if bound == 0.0 {
                bound = system_bound;
            }
            let q = if kind == BusKind::Ac { bound } else { 0.0 };
            gens[side] = d.net.generators.len();
            d.net.generators.push(Generator {
                bus: aux,
                p_min: -bound,
                p_max: bound,
                q_min: -q,
                q_max: q,
                cost: 0.0,
                is_auxiliary: true,
            });
            d.generator_origin.push(None);
        }
        ties.push(TieCut {
            branch: k,
            kind,
            regions: (bi.region, bj.region),
            ends: (br.from, br.to),
            aux_buses: (m, n),
            aux_generators: (gens[0], gens[1]),
        });
    }

    let mut regions = Vec::with_capacity(drafts.len());
    for (d, &r) in drafts.into_iter().zip(&order) {
        let problem = OpfProblem::new(&d.net).map_err(|source| PartitionError::Regional { region: r, source })?;
        regions.push(RegionalProblem {
            region: r,
            network: d.net,
            problem,
            rows: Vec::new(),
            bus_origin: d.bus_origin,
            generator_origin: d.generator_origin,
            converter_origin: d.converter_origin,
        });
    }

    let mut constraints = Vec::new();
    for (t, tie) in ties.iter().enumerate() {
        let sides = [
            (pos_of[&tie.regions.0], tie.aux_buses.0, tie.aux_generators.0),
            (pos_of[&tie.regions.1], tie.aux_buses.1, tie.aux_generators.1),
        ];
        for &kind in CouplingKind::for_tie(tie.kind) {
            let row = constraints.len();
            let mut terms = [(0usize, 0usize, 0.0f64); 2];
            for (s, &(rk, aux_bus, aux_gen)) in sides.iter().enumerate() {
                let rp = &regions[rk];
                let map = rp.problem.map();
                let bpos = rp.network.buses.iter().position(|b| b.id == aux_bus).expect("aux bus");
                let var = match kind {
                    CouplingKind::Vmag => map.vm(bpos),
                    CouplingKind::Vang => map.va(bpos),
                    CouplingKind::Vdc => map.vdc(bpos),
                    CouplingKind::Pgen | CouplingKind::Pdc => map.pg(aux_gen),
                    CouplingKind::Qgen => map.qg(aux_gen).expect("aux generator on an AC bus"),
                };
                let coeff = if s == 0 { 1.0 } else { kind.far_coefficient() };
                terms[s] = (rk, var, coeff);
            }
            for s in 0..2 {
                let (rk, var, coeff) = terms[s];
                regions[rk].rows.push(LocalRow {
                    row,
                    tie: t,
                    kind,
                    variable: var,
                    coefficient: coeff,
                    neighbor: terms[1 - s].0,
                });
            }
            constraints.push(CouplingConstraint { row, tie: t, kind, terms });
        }
    }

    Ok(Partition { original: net.clone(), regions, ties, constraints })
}
