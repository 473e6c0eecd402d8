use std::ops::Range;

use gridopt_network::{BusKind, Network};

/// Placement of the OPF variables in the NLP vector.
///
/// Layout: `[|V| (AC buses), ∠V (AC buses), V (DC buses), P_G, Q_G (generators
/// on AC buses), P_C, Q_C]`. Buses and devices keep network order within each
/// block.
#[derive(Debug, Clone, PartialEq)]
pub struct OpfVariableMap {
    pub vm: Range<usize>,
    pub va: Range<usize>,
    pub vdc: Range<usize>,
    pub pg: Range<usize>,
    pub qg: Range<usize>,
    pub pc: Range<usize>,
    pub qc: Range<usize>,
    /// Per bus position: ordinal among buses of its own kind.
    bus_ordinal: Vec<usize>,
    bus_kind: Vec<BusKind>,
    /// Per generator: ordinal in the `qg` block, if it sits on an AC bus.
    qg_ordinal: Vec<Option<usize>>,
}

impl OpfVariableMap {
    pub fn new(net: &Network) -> Self {
        let mut n_ac = 0;
        let mut n_dc = 0;
        let mut bus_ordinal = Vec::with_capacity(net.buses.len());
        for b in &net.buses {
            match b.kind {
                BusKind::Ac => {
                    bus_ordinal.push(n_ac);
                    n_ac += 1;
                }
                BusKind::Dc => {
                    bus_ordinal.push(n_dc);
                    n_dc += 1;
                }
            }
        }
        let lookup = net.bus_lookup();
        let mut n_q = 0;
        let qg_ordinal = net
            .generators
            .iter()
            .map(|g| {
                if net.buses[lookup[&g.bus]].kind == BusKind::Ac {
                    n_q += 1;
                    Some(n_q - 1)
                } else {
                    None
                }
            })
            .collect();
        let n_g = net.generators.len();
        let n_c = net.converters.len();
        let mut at = 0;
        let mut block = |len: usize| {
            let r = at..at + len;
            at += len;
            r
        };
        Self {
            vm: block(n_ac),
            va: block(n_ac),
            vdc: block(n_dc),
            pg: block(n_g),
            qg: block(n_q),
            pc: block(n_c),
            qc: block(n_c),
            bus_ordinal,
            bus_kind: net.buses.iter().map(|b| b.kind).collect(),
            qg_ordinal,
        }
    }

    pub fn len(&self) -> usize {
        self.qc.end
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Ordinal of bus position `b` among buses of its kind.
    pub fn ordinal(&self, b: usize) -> usize {
        self.bus_ordinal[b]
    }

    /// Voltage magnitude index of AC bus position `b`.
    pub fn vm(&self, b: usize) -> usize {
        debug_assert_eq!(self.bus_kind[b], BusKind::Ac);
        self.vm.start + self.bus_ordinal[b]
    }

    pub fn va(&self, b: usize) -> usize {
        debug_assert_eq!(self.bus_kind[b], BusKind::Ac);
        self.va.start + self.bus_ordinal[b]
    }

    pub fn vdc(&self, b: usize) -> usize {
        debug_assert_eq!(self.bus_kind[b], BusKind::Dc);
        self.vdc.start + self.bus_ordinal[b]
    }

    /// Voltage magnitude index of any bus.
    pub fn voltage(&self, b: usize) -> usize {
        match self.bus_kind[b] {
            BusKind::Ac => self.vm(b),
            BusKind::Dc => self.vdc(b),
        }
    }

    pub fn pg(&self, g: usize) -> usize {
        self.pg.start + g
    }

    pub fn qg(&self, g: usize) -> Option<usize> {
        self.qg_ordinal[g].map(|k| self.qg.start + k)
    }

    pub fn pc(&self, c: usize) -> usize {
        self.pc.start + c
    }

    pub fn qc(&self, c: usize) -> usize {
        self.qc.start + c
    }
}
