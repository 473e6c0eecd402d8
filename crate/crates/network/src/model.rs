use std::collections::{HashMap, HashSet};

use crate::NetworkError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BusKind {
    Ac,
    Dc,
}

impl BusKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BusKind::Ac => "ac",
            BusKind::Dc => "dc",
        }
    }
}

/// A network node. Loads and shunts are stored in per-unit on the system base.
#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: u32,
    pub kind: BusKind,
    pub v_min: f64,
    pub v_max: f64,
    pub is_ref: bool,
    pub region: u32,
    pub p_load: f64,
    pub q_load: f64,
    /// Shunt conductance at 1 pu voltage (AC only).
    pub gs: f64,
    /// Shunt susceptance at 1 pu voltage (AC only).
    pub bs: f64,
}

impl Bus {
    pub fn new(id: u32, kind: BusKind, region: u32) -> Self {
        Self {
            id,
            kind,
            v_min: 0.9,
            v_max: 1.1,
            is_ref: false,
            region,
            p_load: 0.0,
            q_load: 0.0,
            gs: 0.0,
            bs: 0.0,
        }
    }
}

/// π-model line. DC lines use `r` only.
///
/// The line-charging susceptance is stored per end so that a line cut in two
/// halves keeps each end's share where it was.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub from: u32,
    pub to: u32,
    pub r: f64,
    pub x: f64,
    pub b_from: f64,
    pub b_to: f64,
}

impl Branch {
    /// Line with total charging `b` split evenly between its ends.
    pub fn new(from: u32, to: u32, r: f64, x: f64, b: f64) -> Self {
        Self {
            from,
            to,
            r,
            x,
            b_from: 0.5 * b,
            b_to: 0.5 * b,
        }
    }

    pub fn total_charging(&self) -> f64 {
        self.b_from + self.b_to
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub bus: u32,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    /// Linear cost in currency per MWh.
    pub cost: f64,
    pub is_auxiliary: bool,
}

/// Voltage-source converter between an AC and a DC bus.
///
/// Losses are `c0 + c2 (P² + Q²)` in per-unit, drawn from the DC side.
#[derive(Debug, Clone, PartialEq)]
pub struct Converter {
    pub ac_bus: u32,
    pub dc_bus: u32,
    pub s_rated: f64,
    pub loss_c0: f64,
    pub loss_c2: f64,
}

impl Converter {
    /// Converter with the default loss curve: 1.1 % of rating at no load and
    /// 1.85 % at rated apparent power.
    pub fn with_default_losses(ac_bus: u32, dc_bus: u32, s_rated: f64) -> Self {
        Self {
            ac_bus,
            dc_bus,
            s_rated,
            loss_c0: default_loss_c0(s_rated),
            loss_c2: default_loss_c2(s_rated),
        }
    }

    pub fn loss(&self, p: f64, q: f64) -> f64 {
        self.loss_c0 + self.loss_c2 * (p * p + q * q)
    }
}

pub fn default_loss_c0(s_rated: f64) -> f64 {
    0.011 * s_rated
}

pub fn default_loss_c2(s_rated: f64) -> f64 {
    0.0075 / s_rated
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub base_mva: f64,
    /// Quadratic reactive-power cost in currency per Mvar² per hour.
    pub a_q: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    pub converters: Vec<Converter>,
}

impl Default for Network {
    fn default() -> Self {
        Self {
            base_mva: 100.0,
            a_q: 0.001,
            buses: Vec::new(),
            branches: Vec::new(),
            generators: Vec::new(),
            converters: Vec::new(),
        }
    }
}

impl Network {
    /// Map from bus id to position in `buses`.
    pub fn bus_lookup(&self) -> HashMap<u32, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect()
    }

    pub fn bus(&self, id: u32) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    /// Positions of buses of the given kind, in network order.
    pub fn buses_of_kind(&self, kind: BusKind) -> Vec<usize> {
        (0..self.buses.len()).filter(|&i| self.buses[i].kind == kind).collect()
    }

    pub fn regions(&self) -> Vec<u32> {
        let mut r: Vec<u32> = self.buses.iter().map(|b| b.region).collect();
        r.sort_unstable();
        r.dedup();
        r
    }

    /// True iff the branch endpoints lie in different regions.
    pub fn is_tie(&self, branch: &Branch) -> bool {
        match (self.bus(branch.from), self.bus(branch.to)) {
            (Some(a), Some(b)) => a.region != b.region,
            _ => false,
        }
    }

    pub fn tie_branches(&self) -> Vec<usize> {
        let lookup = self.bus_lookup();
        (0..self.branches.len())
            .filter(|&k| {
                let br = &self.branches[k];
                self.buses[lookup[&br.from]].region != self.buses[lookup[&br.to]].region
            })
            .collect()
    }

    pub fn total_load(&self) -> f64 {
        self.buses.iter().map(|b| b.p_load).sum()
    }

    /// Full validation including the reference-bus rule.
    pub fn validate(&self) -> Result<(), NetworkError> {
        self.validate_structure()?;
        self.validate_references()?;
        self.validate_connectivity()
    }

    /// Validation of everything except reference buses and connectivity. Used
    /// for regional sub-networks, which may lack a reference bus.
    pub fn validate_structure(&self) -> Result<(), NetworkError> {
        if !(self.base_mva > 0.0) || !self.base_mva.is_finite() {
            return Err(NetworkError::InvalidValue(format!("base_mva = {}", self.base_mva)));
        }
        if !(self.a_q >= 0.0) || !self.a_q.is_finite() {
            return Err(NetworkError::InvalidValue(format!("a_q = {}", self.a_q)));
        }
        let mut seen = HashSet::new();
        for b in &self.buses {
            if !seen.insert(b.id) {
                return Err(NetworkError::DuplicateBus(b.id));
            }
            if !(b.v_min > 0.0 && b.v_min <= b.v_max) || !b.v_max.is_finite() {
                return Err(NetworkError::InvalidValue(format!(
                    "bus {}: voltage bounds [{}, {}]",
                    b.id, b.v_min, b.v_max
                )));
            }
            if !(b.p_load.is_finite() && b.q_load.is_finite() && b.gs.is_finite() && b.bs.is_finite()) {
                return Err(NetworkError::InvalidValue(format!("bus {}: non-finite load or shunt", b.id)));
            }
            if b.kind == BusKind::Dc && (b.q_load != 0.0 || b.gs != 0.0 || b.bs != 0.0) {
                return Err(NetworkError::ReactiveOnDc(b.id));
            }
            if b.is_ref && !(b.v_min <= 1.0 && 1.0 <= b.v_max) {
                return Err(NetworkError::InvalidValue(format!(
                    "reference bus {} must admit 1.0 pu within [{}, {}]",
                    b.id, b.v_min, b.v_max
                )));
            }
        }
        let lookup = self.bus_lookup();
        let kind_of = |id: u32, what: &'static str| -> Result<BusKind, NetworkError> {
            lookup
                .get(&id)
                .map(|&i| self.buses[i].kind)
                .ok_or(NetworkError::DanglingBus { what, id })
        };
        for br in &self.branches {
            let kf = kind_of(br.from, "branch")?;
            let kt = kind_of(br.to, "branch")?;
            if kf != kt {
                return Err(NetworkError::BranchKindMismatch { from: br.from, to: br.to });
            }
            if br.from == br.to {
                return Err(NetworkError::InvalidValue(format!("branch {}-{} is a self loop", br.from, br.to)));
            }
            let finite = [br.r, br.x, br.b_from, br.b_to].iter().all(|v| v.is_finite());
            if !finite || br.r.hypot(br.x) <= 0.0 {
                return Err(NetworkError::InvalidValue(format!(
                    "branch {}-{}: impedance must be finite and nonzero",
                    br.from, br.to
                )));
            }
            if kf == BusKind::Dc && (br.x != 0.0 || br.b_from != 0.0 || br.b_to != 0.0 || br.r <= 0.0) {
                return Err(NetworkError::InvalidValue(format!(
                    "DC branch {}-{} must have r > 0 and no reactance or charging",
                    br.from, br.to
                )));
            }
        }
        for g in &self.generators {
            let k = kind_of(g.bus, "generator")?;
            if k == BusKind::Dc && !g.is_auxiliary {
                return Err(NetworkError::GeneratorOnDc(g.bus));
            }
            let finite = [g.p_min, g.p_max, g.q_min, g.q_max, g.cost].iter().all(|v| v.is_finite());
            if !finite || g.p_min > g.p_max || g.q_min > g.q_max {
                return Err(NetworkError::InvalidValue(format!("generator at bus {}: limits", g.bus)));
            }
        }
        for c in &self.converters {
            let ka = kind_of(c.ac_bus, "converter")?;
            let kd = kind_of(c.dc_bus, "converter")?;
            if ka != BusKind::Ac || kd != BusKind::Dc {
                return Err(NetworkError::ConverterKinds { ac_bus: c.ac_bus, dc_bus: c.dc_bus });
            }
            if !(c.s_rated > 0.0 && c.s_rated.is_finite()) || !(c.loss_c0 >= 0.0) || !(c.loss_c2 >= 0.0) {
                return Err(NetworkError::InvalidValue(format!(
                    "converter {}-{}: rating and loss coefficients",
                    c.ac_bus, c.dc_bus
                )));
            }
        }
        Ok(())
    }

    /// Islands formed by branches only, each a sorted list of bus positions.
    pub fn islands(&self) -> Vec<Vec<usize>> {
        let lookup = self.bus_lookup();
        let mut uf = UnionFind::new(self.buses.len());
        for br in &self.branches {
            if let (Some(&a), Some(&b)) = (lookup.get(&br.from), lookup.get(&br.to)) {
                uf.union(a, b);
            }
        }
        uf.groups()
    }

    fn validate_references(&self) -> Result<(), NetworkError> {
        for island in self.islands() {
            let refs: Vec<u32> = island.iter().filter(|&&i| self.buses[i].is_ref).map(|&i| self.buses[i].id).collect();
            let first = self.buses[island[0]].id;
            match refs.len() {
                0 => return Err(NetworkError::MissingReference(first)),
                1 => {}
                _ => return Err(NetworkError::DuplicateReference(refs[0], refs[1])),
            }
        }
        Ok(())
    }

    fn validate_connectivity(&self) -> Result<(), NetworkError> {
        if self.buses.is_empty() {
            return Ok(());
        }
        let lookup = self.bus_lookup();
        let mut uf = UnionFind::new(self.buses.len());
        for br in &self.branches {
            uf.union(lookup[&br.from], lookup[&br.to]);
        }
        for c in &self.converters {
            uf.union(lookup[&c.ac_bus], lookup[&c.dc_bus]);
        }
        let groups = uf.groups();
        if groups.len() > 1 {
            return Err(NetworkError::Disconnected(self.buses[groups[1][0]].id));
        }
        Ok(())
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = self.find(i);
            by_root[r].push(i);
        }
        by_root.into_iter().filter(|g| !g.is_empty()).collect()
    }
}
