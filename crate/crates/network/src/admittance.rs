use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::model::{BusKind, Network};

/// Square sparse matrix over the buses of one kind. Row/column `k`
/// corresponds to `bus_ids[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BusMatrix<T> {
    pub bus_ids: Vec<u32>,
    entries: BTreeMap<(usize, usize), T>,
}

impl<T: Copy + Default + std::ops::AddAssign> BusMatrix<T> {
    fn new(bus_ids: Vec<u32>) -> Self {
        Self {
            bus_ids,
            entries: BTreeMap::new(),
        }
    }

    fn add(&mut self, i: usize, j: usize, v: T) {
        *self.entries.entry((i, j)).or_default() += v;
    }

    pub fn dim(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries.get(&(i, j)).copied().unwrap_or_default()
    }

    /// Stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.dim();
        let mut d = vec![vec![T::default(); n]; n];
        for (i, j, v) in self.iter() {
            d[i][j] = v;
        }
        d
    }

    /// Row-wise lists of `(column, value)`.
    pub fn rows(&self) -> Vec<Vec<(usize, T)>> {
        let mut rows = vec![Vec::new(); self.dim()];
        for (i, j, v) in self.iter() {
            rows[i].push((j, v));
        }
        rows
    }
}

fn positions(net: &Network, kind: BusKind) -> (Vec<u32>, std::collections::HashMap<u32, usize>) {
    let ids: Vec<u32> = net.buses.iter().filter(|b| b.kind == kind).map(|b| b.id).collect();
    let pos = ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
    (ids, pos)
}

/// Complex bus admittance matrix of the AC buses.
pub fn build_ac_admittance(net: &Network) -> BusMatrix<Complex64> {
    let (ids, pos) = positions(net, BusKind::Ac);
    let mut y = BusMatrix::new(ids);
    for b in net.buses.iter().filter(|b| b.kind == BusKind::Ac) {
        let k = pos[&b.id];
        y.add(k, k, Complex64::new(b.gs, b.bs));
    }
    for br in &net.branches {
        let (Some(&i), Some(&j)) = (pos.get(&br.from), pos.get(&br.to)) else {
            continue;
        };
        let ys = Complex64::new(br.r, br.x).inv();
        y.add(i, i, ys + Complex64::new(0.0, br.b_from));
        y.add(j, j, ys + Complex64::new(0.0, br.b_to));
        y.add(i, j, -ys);
        y.add(j, i, -ys);
    }
    y
}

/// Real conductance matrix of the DC buses.
pub fn build_dc_admittance(net: &Network) -> BusMatrix<f64> {
    let (ids, pos) = positions(net, BusKind::Dc);
    let mut y = BusMatrix::new(ids);
    for br in &net.branches {
        let (Some(&i), Some(&j)) = (pos.get(&br.from), pos.get(&br.to)) else {
            continue;
        };
        let g = 1.0 / br.r;
        y.add(i, i, g);
        y.add(j, j, g);
        y.add(i, j, -g);
        y.add(j, i, -g);
    }
    y
}
