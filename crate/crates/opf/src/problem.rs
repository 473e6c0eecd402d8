use gridopt_network::{build_ac_admittance, build_dc_admittance, BusKind, Network};
use gridopt_nlp::{NlpProblem, Triplets};

use crate::map::OpfVariableMap;
use crate::OpfError;

/// Which buses an assembled problem covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    All,
    /// Buses tagged with this region, the branches and converters among them
    /// and the generators attached to them.
    Region(u32),
}

/// Sub-network induced by the buses of one region.
pub fn restrict(net: &Network, region: u32) -> Result<Network, OpfError> {
    let keep: std::collections::HashSet<u32> =
        net.buses.iter().filter(|b| b.region == region).map(|b| b.id).collect();
    if keep.is_empty() {
        return Err(OpfError::EmptyScope(region));
    }
    Ok(Network {
        base_mva: net.base_mva,
        a_q: net.a_q,
        buses: net.buses.iter().filter(|b| keep.contains(&b.id)).cloned().collect(),
        branches: net
            .branches
            .iter()
            .filter(|br| keep.contains(&br.from) && keep.contains(&br.to))
            .cloned()
            .collect(),
        generators: net.generators.iter().filter(|g| keep.contains(&g.bus)).cloned().collect(),
        converters: net
            .converters
            .iter()
            .filter(|c| keep.contains(&c.ac_bus) && keep.contains(&c.dc_bus))
            .cloned()
            .collect(),
    })
}

#[derive(Debug, Clone)]
struct AcRow {
    /// `(ordinal, G, B)` including the diagonal.
    entries: Vec<(usize, f64, f64)>,
    p_load: f64,
    q_load: f64,
    /// `(P index, Q index)` of injecting generators.
    gens: Vec<(usize, usize)>,
    /// `(P_C index, Q_C index)` of converters on this bus.
    convs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
struct DcRow {
    entries: Vec<(usize, f64)>,
    p_load: f64,
    gens: Vec<usize>,
    /// `(P_C index, Q_C index, c0, c2)`
    convs: Vec<(usize, usize, f64, f64)>,
}

/// The AC-DC OPF of one network as a smooth NLP.
///
/// Equality rows: AC active balance, AC reactive balance, DC balance, then
/// fixings (reference voltages and variables with equal bounds).
/// Inequality rows: converter apparent-power caps `P² + Q² − S̄² ≤ 0`.
#[derive(Debug, Clone)]
pub struct OpfProblem {
    net: Network,
    map: OpfVariableMap,
    ac: Vec<AcRow>,
    dc: Vec<DcRow>,
    /// AC ordinal → variable indices `(vm, va)`.
    ac_vars: Vec<(usize, usize)>,
    dc_vars: Vec<usize>,
    fixed: Vec<(usize, f64)>,
    linear_cost: Vec<(usize, f64)>,
    quadratic_cost: Vec<(usize, f64)>,
    caps: Vec<(usize, usize, f64)>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x0: Vec<f64>,
}

/// Builds the OPF of `net` restricted to `scope`.
pub fn assemble(net: &Network, scope: Scope) -> Result<OpfProblem, OpfError> {
    let owned;
    let net = match scope {
        Scope::All => net,
        Scope::Region(r) => {
            owned = restrict(net, r)?;
            &owned
        }
    };
    OpfProblem::new(net)
}

impl OpfProblem {
    pub fn new(net: &Network) -> Result<Self, OpfError> {
        net.validate_structure()?;
        let load: f64 = net.buses.iter().map(|b| b.p_load.abs() + b.q_load.abs()).sum();
        if net.generators.is_empty() && load > 0.0 {
            return Err(OpfError::NoGeneration);
        }
        let map = OpfVariableMap::new(net);
        let n = map.len();
        let base = net.base_mva;
        let lookup = net.bus_lookup();

        let ac_pos = net.buses_of_kind(BusKind::Ac);
        let dc_pos = net.buses_of_kind(BusKind::Dc);
        let ac_vars: Vec<(usize, usize)> = ac_pos.iter().map(|&b| (map.vm(b), map.va(b))).collect();
        let dc_vars: Vec<usize> = dc_pos.iter().map(|&b| map.vdc(b)).collect();

        let yac = build_ac_admittance(net);
        let mut ac: Vec<AcRow> = ac_pos
            .iter()
            .map(|&b| AcRow {
                entries: Vec::new(),
                p_load: net.buses[b].p_load,
                q_load: net.buses[b].q_load,
                gens: Vec::new(),
                convs: Vec::new(),
            })
            .collect();
        for (i, j, y) in yac.iter() {
            ac[i].entries.push((j, y.re, y.im));
        }
        let ydc = build_dc_admittance(net);
        let mut dc: Vec<DcRow> = dc_pos
            .iter()
            .map(|&b| DcRow {
                entries: Vec::new(),
                p_load: net.buses[b].p_load,
                gens: Vec::new(),
                convs: Vec::new(),
            })
            .collect();
        for (i, j, g) in ydc.iter() {
            dc[i].entries.push((j, g));
        }

        let mut lo = vec![f64::NEG_INFINITY; n];
        let mut hi = vec![f64::INFINITY; n];
        let mut x0 = vec![0.0; n];
        let mut fixed = Vec::new();
        let mut linear_cost = Vec::new();
        let mut quadratic_cost = Vec::new();

        for (b, bus) in net.buses.iter().enumerate() {
            let v = map.voltage(b);
            lo[v] = bus.v_min;
            hi[v] = bus.v_max;
            x0[v] = 1.0f64.clamp(bus.v_min, bus.v_max);
            if bus.is_ref {
                fixed.push((v, 1.0));
                if bus.kind == BusKind::Ac {
                    fixed.push((map.va(b), 0.0));
                }
            }
        }
        for (g, gen) in net.generators.iter().enumerate() {
            let bpos = lookup[&gen.bus];
            let p = map.pg(g);
            lo[p] = gen.p_min;
            hi[p] = gen.p_max;
            x0[p] = 0.5 * (gen.p_min + gen.p_max);
            if !gen.is_auxiliary && gen.cost != 0.0 {
                linear_cost.push((p, gen.cost * base));
            }
            match map.qg(g) {
                Some(q) => {
                    lo[q] = gen.q_min;
                    hi[q] = gen.q_max;
                    x0[q] = 0.5 * (gen.q_min + gen.q_max);
                    if !gen.is_auxiliary && net.a_q != 0.0 {
                        quadratic_cost.push((q, net.a_q * base * base));
                    }
                    ac[map.ordinal(bpos)].gens.push((p, q));
                }
                None => dc[map.ordinal(bpos)].gens.push(p),
            }
        }
        let mut caps = Vec::new();
        for (c, conv) in net.converters.iter().enumerate() {
            let (p, q) = (map.pc(c), map.qc(c));
            for v in [p, q] {
                lo[v] = -conv.s_rated;
                hi[v] = conv.s_rated;
            }
            if net.a_q != 0.0 {
                quadratic_cost.push((q, net.a_q * base * base));
            }
            caps.push((p, q, conv.s_rated * conv.s_rated));
            ac[map.ordinal(lookup[&conv.ac_bus])].convs.push((p, q));
            dc[map.ordinal(lookup[&conv.dc_bus])]
                .convs
                .push((p, q, conv.loss_c0, conv.loss_c2));
        }

        // Degenerate boxes become equality rows; the interior-point method
        // needs a nonempty interior.
        for j in 0..n {
            if lo[j] == hi[j] {
                if !fixed.iter().any(|&(k, _)| k == j) {
                    fixed.push((j, lo[j]));
                }
                lo[j] = f64::NEG_INFINITY;
                hi[j] = f64::INFINITY;
            }
        }

        Ok(Self {
            net: net.clone(),
            map,
            ac,
            dc,
            ac_vars,
            dc_vars,
            fixed,
            linear_cost,
            quadratic_cost,
            caps,
            lo,
            hi,
            x0,
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn map(&self) -> &OpfVariableMap {
        &self.map
    }

    /// Number of AC buses, i.e. the length of each AC balance block.
    pub fn num_ac(&self) -> usize {
        self.ac.len()
    }

    pub fn num_dc(&self) -> usize {
        self.dc.len()
    }

    /// Equality-row offset of the fixings block.
    pub fn fixing_offset(&self) -> usize {
        2 * self.ac.len() + self.dc.len()
    }

    pub fn fixings(&self) -> &[(usize, f64)] {
        &self.fixed
    }

    /// Generation cost in currency per hour, auxiliary units excluded.
    pub fn cost(&self, x: &[f64]) -> f64 {
        NlpProblem::objective(self, x)
    }

    fn ac_terms(&self, x: &[f64], i: usize) -> (f64, f64) {
        let (vi, ti) = (x[self.ac_vars[i].0], x[self.ac_vars[i].1]);
        let mut p = 0.0;
        let mut q = 0.0;
        for &(l, g, b) in &self.ac[i].entries {
            if l == i {
                p += vi * vi * g;
                q -= vi * vi * b;
            } else {
                let (vl, tl) = (x[self.ac_vars[l].0], x[self.ac_vars[l].1]);
                let (s, c) = (ti - tl).sin_cos();
                p += vi * vl * (g * c + b * s);
                q += vi * vl * (g * s - b * c);
            }
        }
        (p, q)
    }
}

impl NlpProblem for OpfProblem {
    fn num_variables(&self) -> usize {
        self.map.len()
    }

    fn num_equalities(&self) -> usize {
        2 * self.ac.len() + self.dc.len() + self.fixed.len()
    }

    fn num_inequalities(&self) -> usize {
        self.caps.len()
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.lo.clone(), self.hi.clone())
    }

    fn initial_point(&self) -> Vec<f64> {
        self.x0.clone()
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.linear_cost.iter().map(|&(j, c)| c * x[j]).sum();
        let quad: f64 = self.quadratic_cost.iter().map(|&(j, c)| c * x[j] * x[j]).sum();
        lin + quad
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for &(j, c) in &self.linear_cost {
            g[j] += c;
        }
        for &(j, c) in &self.quadratic_cost {
            g[j] += 2.0 * c * x[j];
        }
        g
    }

    fn equalities(&self, x: &[f64]) -> Vec<f64> {
        let nac = self.ac.len();
        let mut out = vec![0.0; self.num_equalities()];
        for (i, row) in self.ac.iter().enumerate() {
            let (mut p, mut q) = self.ac_terms(x, i);
            p += row.p_load;
            q += row.q_load;
            for &(pg, qg) in &row.gens {
                p -= x[pg];
                q -= x[qg];
            }
            for &(pc, qc) in &row.convs {
                p -= x[pc];
                q -= x[qc];
            }
            out[i] = p;
            out[nac + i] = q;
        }
        for (j, row) in self.dc.iter().enumerate() {
            let vj = x[self.dc_vars[j]];
            let mut r = row.p_load;
            for &(l, g) in &row.entries {
                r += vj * g * x[self.dc_vars[l]];
            }
            for &pg in &row.gens {
                r -= x[pg];
            }
            for &(pc, qc, c0, c2) in &row.convs {
                r += x[pc] + c0 + c2 * (x[pc] * x[pc] + x[qc] * x[qc]);
            }
            out[2 * nac + j] = r;
        }
        let off = self.fixing_offset();
        for (k, &(j, v)) in self.fixed.iter().enumerate() {
            out[off + k] = x[j] - v;
        }
        out
    }

    fn equality_jacobian(&self, x: &[f64]) -> Triplets {
        let nac = self.ac.len();
        let mut t = Triplets::new(self.num_equalities(), x.len());
        for (i, row) in self.ac.iter().enumerate() {
            let (vmi, vai) = self.ac_vars[i];
            let (vi, ti) = (x[vmi], x[vai]);
            for &(l, g, b) in &row.entries {
                if l == i {
                    t.push(i, vmi, 2.0 * vi * g);
                    t.push(nac + i, vmi, -2.0 * vi * b);
                    continue;
                }
                let (vml, val) = self.ac_vars[l];
                let vl = x[vml];
                let (s, c) = (ti - x[val]).sin_cos();
                let (ap, dap) = (g * c + b * s, -g * s + b * c);
                let (aq, daq) = (g * s - b * c, g * c + b * s);
                t.push(i, vmi, vl * ap);
                t.push(i, vml, vi * ap);
                t.push(i, vai, vi * vl * dap);
                t.push(i, val, -vi * vl * dap);
                t.push(nac + i, vmi, vl * aq);
                t.push(nac + i, vml, vi * aq);
                t.push(nac + i, vai, vi * vl * daq);
                t.push(nac + i, val, -vi * vl * daq);
            }
            for &(pg, qg) in &row.gens {
                t.push(i, pg, -1.0);
                t.push(nac + i, qg, -1.0);
            }
            for &(pc, qc) in &row.convs {
                t.push(i, pc, -1.0);
                t.push(nac + i, qc, -1.0);
            }
        }
        for (j, row) in self.dc.iter().enumerate() {
            let r = 2 * nac + j;
            let vjx = self.dc_vars[j];
            let vj = x[vjx];
            for &(l, g) in &row.entries {
                let vlx = self.dc_vars[l];
                if l == j {
                    t.push(r, vjx, 2.0 * g * vj);
                } else {
                    t.push(r, vjx, g * x[vlx]);
                    t.push(r, vlx, g * vj);
                }
            }
            for &pg in &row.gens {
                t.push(r, pg, -1.0);
            }
            for &(pc, qc, _, c2) in &row.convs {
                t.push(r, pc, 1.0 + 2.0 * c2 * x[pc]);
                t.push(r, qc, 2.0 * c2 * x[qc]);
            }
        }
        let off = self.fixing_offset();
        for (k, &(j, _)) in self.fixed.iter().enumerate() {
            t.push(off + k, j, 1.0);
        }
        t
    }

    fn inequalities(&self, x: &[f64]) -> Vec<f64> {
        self.caps
            .iter()
            .map(|&(p, q, s2)| x[p] * x[p] + x[q] * x[q] - s2)
            .collect()
    }

    fn inequality_jacobian(&self, x: &[f64]) -> Triplets {
        let mut t = Triplets::new(self.caps.len(), x.len());
        for (k, &(p, q, _)) in self.caps.iter().enumerate() {
            t.push(k, p, 2.0 * x[p]);
            t.push(k, q, 2.0 * x[q]);
        }
        t
    }

    fn hessian(&self, x: &[f64], obj_factor: f64, eq: &[f64], ineq: &[f64]) -> Option<Triplets> {
        let n = x.len();
        let nac = self.ac.len();
        let mut t = Triplets::new(n, n);
        let mut push = |a: usize, b: usize, v: f64| {
            if a >= b {
                t.push(a, b, v);
            } else {
                t.push(b, a, v);
            }
        };
        for &(j, c) in &self.quadratic_cost {
            push(j, j, 2.0 * obj_factor * c);
        }
        for (i, row) in self.ac.iter().enumerate() {
            let (wp, wq) = (eq[i], eq[nac + i]);
            if wp == 0.0 && wq == 0.0 {
                continue;
            }
            let (vmi, vai) = self.ac_vars[i];
            let (vi, ti) = (x[vmi], x[vai]);
            for &(l, g, b) in &row.entries {
                if l == i {
                    push(vmi, vmi, 2.0 * (wp * g - wq * b));
                    continue;
                }
                let (vml, val) = self.ac_vars[l];
                let vl = x[vml];
                let (s, c) = (ti - x[val]).sin_cos();
                let a = wp * (g * c + b * s) + wq * (g * s - b * c);
                let da = wp * (-g * s + b * c) + wq * (g * c + b * s);
                push(vmi, vml, a);
                push(vmi, vai, vl * da);
                push(vmi, val, -vl * da);
                push(vml, vai, vi * da);
                push(vml, val, -vi * da);
                push(vai, vai, -vi * vl * a);
                push(val, val, -vi * vl * a);
                push(vai, val, vi * vl * a);
            }
        }
        for (j, row) in self.dc.iter().enumerate() {
            let w = eq[2 * nac + j];
            if w == 0.0 {
                continue;
            }
            let vjx = self.dc_vars[j];
            for &(l, g) in &row.entries {
                if l == j {
                    push(vjx, vjx, 2.0 * w * g);
                } else {
                    push(vjx, self.dc_vars[l], w * g);
                }
            }
            for &(pc, qc, _, c2) in &row.convs {
                push(pc, pc, 2.0 * w * c2);
                push(qc, qc, 2.0 * w * c2);
            }
        }
        for (k, &(p, q, _)) in self.caps.iter().enumerate() {
            push(p, p, 2.0 * ineq[k]);
            push(q, q, 2.0 * ineq[k]);
        }
        Some(t)
    }
}

