//! Symmetric indefinite factorizations for the Newton (KKT) systems.
//!
//! Two backends share the [`SymmetricFactor`] interface:
//!
//! * [`DenseBunchKaufman`]: `P A Pᵀ = L D Lᵀ` with 1×1 / 2×2 pivots, used for
//!   small systems.
//! * [`SparseLdl`]: static-pivot `LDLᵀ` after a minimum-degree ordering. It
//!   needs a quasi-definite matrix, so the caller keeps a small negative
//!   diagonal on the constraint block and corrects with iterative refinement.
//!
//! Both report the inertia of the factored matrix, which drives the Hessian
//! regularization in the interior-point loop.

use std::collections::BTreeSet;

use crate::sparse::Triplets;

/// Numbers of positive, negative and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

pub trait SymmetricFactor {
    /// Factors the symmetric matrix whose entries are given by one triangle
    /// (off-diagonal entries are mirrored, duplicates summed).
    fn factor(&mut self, a: &Triplets) -> Inertia;

    /// Solves with the most recent factorization. Only meaningful when the
    /// reported inertia had no zero eigenvalues.
    fn solve(&self, b: &[f64]) -> Vec<f64>;
}

fn pivot_threshold(max_abs: f64) -> f64 {
    1e-14 * max_abs.max(1.0)
}

/// Dense Bunch–Kaufman factorization.
#[derive(Debug, Default, Clone)]
pub struct DenseBunchKaufman {
    n: usize,
    /// Row-major working storage; holds L below the diagonal after factoring.
    a: Vec<f64>,
    perm: Vec<usize>,
    /// Pivot block sizes, indexed by the leading column of each block.
    blocks: Vec<u8>,
    d: Vec<[f64; 3]>,
}

impl DenseBunchKaufman {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let n = self.n;
        self.a[i * n + j] = v;
    }

    fn swap_sym(&mut self, p: usize, q: usize) {
        if p == q {
            return;
        }
        let n = self.n;
        for j in 0..n {
            self.a.swap(p * n + j, q * n + j);
        }
        for i in 0..n {
            self.a.swap(i * n + p, i * n + q);
        }
        self.perm.swap(p, q);
    }
}

impl SymmetricFactor for DenseBunchKaufman {
    fn factor(&mut self, m: &Triplets) -> Inertia {
        let n = m.nrows();
        self.n = n;
        self.a = vec![0.0; n * n];
        for (r, c, v) in m.iter() {
            self.a[r * n + c] += v;
            if r != c {
                self.a[c * n + r] += v;
            }
        }
        self.perm = (0..n).collect();
        self.blocks = vec![0; n];
        self.d = vec![[0.0; 3]; n];

        let max_abs = self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = pivot_threshold(max_abs);
        let alpha = (1.0 + 17f64.sqrt()) / 8.0;
        let mut inertia = Inertia::default();

        let mut k = 0;
        while k < n {
            let absakk = self.at(k, k).abs();
            let (mut imax, mut colmax) = (k, 0.0);
            for i in k + 1..n {
                let v = self.at(i, k).abs();
                if v > colmax {
                    colmax = v;
                    imax = i;
                }
            }

            let (kp, kstep) = if absakk.max(colmax) <= tiny {
                (k, 1)
            } else if absakk >= alpha * colmax {
                (k, 1)
            } else {
                let mut rowmax = 0.0f64;
                for j in k..n {
                    if j != imax {
                        rowmax = rowmax.max(self.at(imax, j).abs());
                    }
                }
                if absakk >= alpha * colmax * (colmax / rowmax) {
                    (k, 1)
                } else if self.at(imax, imax).abs() >= alpha * rowmax {
                    (imax, 1)
                } else {
                    (imax, 2)
                }
            };

            let kk = k + kstep - 1;
            self.swap_sym(kp, kk);

            if kstep == 1 {
                let dkk = self.at(k, k);
                self.blocks[k] = 1;
                self.d[k] = [dkk, 0.0, 0.0];
                if dkk.abs() <= tiny {
                    inertia.zero += 1;
                    // Leave the column as-is; the factorization is singular.
                    for i in k + 1..n {
                        self.set(i, k, 0.0);
                    }
                } else {
                    if dkk > 0.0 {
                        inertia.positive += 1;
                    } else {
                        inertia.negative += 1;
                    }
                    let col: Vec<f64> = (0..n).map(|i| if i > k { self.at(i, k) } else { 0.0 }).collect();
                    for i in k + 1..n {
                        let lik = col[i] / dkk;
                        if lik != 0.0 {
                            for j in k + 1..=i {
                                let v = self.at(i, j) - lik * col[j];
                                self.set(i, j, v);
                            }
                        }
                        self.set(i, k, lik);
                    }
                    // Restore symmetry of the trailing block.
                    for i in k + 1..n {
                        for j in k + 1..i {
                            let v = self.at(i, j);
                            self.set(j, i, v);
                        }
                    }
                }
                k += 1;
            } else {
                let d11 = self.at(k, k);
                let d21 = self.at(k + 1, k);
                let d22 = self.at(k + 1, k + 1);
                let det = d11 * d22 - d21 * d21;
                self.blocks[k] = 2;
                self.blocks[k + 1] = 0;
                self.d[k] = [d11, d21, d22];
                if det.abs() <= tiny * tiny {
                    inertia.zero += 1;
                    if d11 + d22 > 0.0 {
                        inertia.positive += 1;
                    } else {
                        inertia.negative += 1;
                    }
                } else if det < 0.0 {
                    inertia.positive += 1;
                    inertia.negative += 1;
                } else if d11 + d22 > 0.0 {
                    inertia.positive += 2;
                } else {
                    inertia.negative += 2;
                }
                let (i11, i21, i22) = (d22 / det, -d21 / det, d11 / det);
                let c1: Vec<f64> = (0..n).map(|i| if i > k + 1 { self.at(i, k) } else { 0.0 }).collect();
                let c2: Vec<f64> = (0..n).map(|i| if i > k + 1 { self.at(i, k + 1) } else { 0.0 }).collect();
                for i in k + 2..n {
                    let (a1, a2) = (c1[i], c2[i]);
                    let l1 = a1 * i11 + a2 * i21;
                    let l2 = a1 * i21 + a2 * i22;
                    for j in k + 2..=i {
                        let v = self.at(i, j) - l1 * c1[j] - l2 * c2[j];
                        self.set(i, j, v);
                    }
                    self.set(i, k, l1);
                    self.set(i, k + 1, l2);
                }
                for i in k + 2..n {
                    for j in k + 2..i {
                        let v = self.at(i, j);
                        self.set(j, i, v);
                    }
                }
                k += 2;
            }
        }
        inertia
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        // L y' = y
        let mut k = 0;
        while k < n {
            let step = self.blocks[k].max(1) as usize;
            for c in k..k + step {
                for i in k + step..n {
                    y[i] -= self.at(i, c) * y[c];
                }
            }
            k += step;
        }
        // D
        let mut k = 0;
        while k < n {
            if self.blocks[k] == 2 {
                let [d11, d21, d22] = self.d[k];
                let det = d11 * d22 - d21 * d21;
                let (a, b2) = (y[k], y[k + 1]);
                y[k] = (d22 * a - d21 * b2) / det;
                y[k + 1] = (d11 * b2 - d21 * a) / det;
                k += 2;
            } else {
                y[k] /= self.d[k][0];
                k += 1;
            }
        }
        // Lᵀ
        let mut k = n;
        while k > 0 {
            // find block start containing k-1
            let mut start = k - 1;
            if start > 0 && self.blocks[start] == 0 {
                start -= 1;
            }
            for c in start..k {
                let mut acc = y[c];
                for i in k..n {
                    acc -= self.at(i, c) * y[i];
                }
                y[c] = acc;
            }
            k = start;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}

/// Sparse `LDLᵀ` without pivoting, preceded by a minimum-degree ordering.
#[derive(Debug, Default, Clone)]
pub struct SparseLdl {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    pattern_key: Option<(usize, Vec<(usize, usize)>)>,
}

impl SparseLdl {
    pub fn new() -> Self {
        Self::default()
    }

    /// Elimination order that greedily picks the node of minimum current
    /// degree in the elimination graph.
    pub fn minimum_degree_order(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &(i, j) in edges {
            if i != j {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
        let mut eliminated = vec![false; n];
        let mut by_degree: BTreeSet<(usize, usize)> = (0..n).map(|i| (adj[i].len(), i)).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&(deg, v)) = by_degree.iter().next() {
            by_degree.remove(&(deg, v));
            eliminated[v] = true;
            order.push(v);
            let nbrs: Vec<usize> = adj[v].iter().copied().filter(|&u| !eliminated[u]).collect();
            for &u in &nbrs {
                by_degree.remove(&(adj[u].len(), u));
                adj[u].remove(&v);
            }
            for (a, &u) in nbrs.iter().enumerate() {
                for &w in &nbrs[a + 1..] {
                    adj[u].insert(w);
                    adj[w].insert(u);
                }
            }
            for &u in &nbrs {
                by_degree.insert((adj[u].len(), u));
            }
            adj[v].clear();
        }
        order
    }
}

impl SymmetricFactor for SparseLdl {
    fn factor(&mut self, m: &Triplets) -> Inertia {
        let n = m.nrows();
        self.n = n;

        // Structure: reuse the ordering when the pattern repeats.
        let mut edges: Vec<(usize, usize)> = m
            .iter()
            .map(|(r, c, _)| if r < c { (r, c) } else { (c, r) })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let reuse = matches!(&self.pattern_key, Some((kn, ke)) if *kn == n && *ke == edges);
        if !reuse {
            self.perm = Self::minimum_degree_order(n, &edges);
            self.pattern_key = Some((n, edges));
        }
        let mut inv = vec![0usize; n];
        for (new, &old) in self.perm.iter().enumerate() {
            inv[old] = new;
        }

        // Upper-triangular CSC of the permuted matrix, duplicates summed.
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (r, c, v) in m.iter() {
            let (pr, pc) = (inv[r], inv[c]);
            let (i, j) = if pr <= pc { (pr, pc) } else { (pc, pr) };
            cols[j].push((i, v));
        }
        let mut ap = vec![0usize; n + 1];
        let mut ai = Vec::new();
        let mut ax = Vec::new();
        let mut max_abs = 0.0f64;
        for (j, col) in cols.iter_mut().enumerate() {
            col.sort_unstable_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for &(i, v) in col.iter() {
                if last == Some(i) {
                    *ax.last_mut().unwrap() += v;
                } else {
                    ai.push(i);
                    ax.push(v);
                    last = Some(i);
                }
            }
            ap[j + 1] = ai.len();
        }
        for v in &ax {
            max_abs = max_abs.max(v.abs());
        }
        let tiny = pivot_threshold(max_abs);

        // Elimination tree and column counts.
        const NONE: usize = usize::MAX;
        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut work = vec![0usize; n];
        for j in 0..n {
            work[j] = j;
            for &i0 in &ai[ap[j]..ap[j + 1]] {
                let mut i = i0;
                while work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
        }
        self.lp = vec![0; n + 1];
        for i in 0..n {
            self.lp[i + 1] = self.lp[i] + lnz[i];
        }
        let total = self.lp[n];
        self.li = vec![0; total];
        self.lx = vec![0.0; total];
        self.d = vec![0.0; n];

        let mut dinv = vec![0.0; n];
        let mut y_vals = vec![0.0; n];
        let mut y_marked = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];
        let mut next_space: Vec<usize> = self.lp[..n].to_vec();
        let mut inertia = Inertia::default();

        for k in 0..n {
            let mut nnz_y = 0;
            self.d[k] = 0.0;
            for p in ap[k]..ap[k + 1] {
                let b = ai[p];
                if b == k {
                    self.d[k] = ax[p];
                    continue;
                }
                y_vals[b] = ax[p];
                if !y_marked[b] {
                    y_marked[b] = true;
                    elim[0] = b;
                    let mut ne = 1;
                    let mut nx = etree[b];
                    while nx != NONE && nx < k {
                        if y_marked[nx] {
                            break;
                        }
                        y_marked[nx] = true;
                        elim[ne] = nx;
                        ne += 1;
                        nx = etree[nx];
                    }
                    while ne > 0 {
                        ne -= 1;
                        y_idx[nnz_y] = elim[ne];
                        nnz_y += 1;
                    }
                }
            }
            for t in (0..nnz_y).rev() {
                let c = y_idx[t];
                let tmp = next_space[c];
                let yc = y_vals[c];
                for j in self.lp[c]..tmp {
                    y_vals[self.li[j]] -= self.lx[j] * yc;
                }
                self.li[tmp] = k;
                self.lx[tmp] = yc * dinv[c];
                self.d[k] -= yc * self.lx[tmp];
                next_space[c] += 1;
                y_vals[c] = 0.0;
                y_marked[c] = false;
            }
            if self.d[k].abs() <= tiny {
                inertia.zero += 1;
                dinv[k] = 0.0;
            } else {
                if self.d[k] > 0.0 {
                    inertia.positive += 1;
                } else {
                    inertia.negative += 1;
                }
                dinv[k] = 1.0 / self.d[k];
            }
        }
        inertia
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
        for j in 0..n {
            x[j] /= self.d[j];
        }
        for j in (0..n).rev() {
            let mut acc = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                acc -= self.lx[p] * x[self.li[p]];
            }
            x[j] = acc;
        }
        let mut out = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}

/// Symmetric equilibration around another factorization: factors `D A D`
/// with `D_i = 1 / sqrt(max_j |A_ij|)`. Congruence keeps the inertia, and the
/// pivot tolerance then acts on a matrix with unit-sized rows.
#[derive(Debug, Clone, Default)]
pub struct Equilibrated<F> {
    inner: F,
    scale: Vec<f64>,
}

impl<F: SymmetricFactor> Equilibrated<F> {
    pub fn new(inner: F) -> Self {
        Self {
            inner,
            scale: Vec::new(),
        }
    }
}

impl<F: SymmetricFactor> SymmetricFactor for Equilibrated<F> {
    fn factor(&mut self, a: &Triplets) -> Inertia {
        let n = a.nrows();
        let mut row_max = vec![0.0f64; n];
        for (r, c, v) in a.iter() {
            row_max[r] = row_max[r].max(v.abs());
            row_max[c] = row_max[c].max(v.abs());
        }
        self.scale = row_max
            .iter()
            .map(|&m| if m > 0.0 && m.is_finite() { 1.0 / m.sqrt() } else { 1.0 })
            .collect();
        let mut scaled = Triplets::with_capacity(n, n, a.nnz());
        for (r, c, v) in a.iter() {
            scaled.push(r, c, v * self.scale[r] * self.scale[c]);
        }
        self.inner.factor(&scaled)
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let sb: Vec<f64> = b.iter().zip(&self.scale).map(|(v, d)| v * d).collect();
        let mut x = self.inner.solve(&sb);
        for (v, d) in x.iter_mut().zip(&self.scale) {
            *v *= d;
        }
        x
    }
}

/// Symmetric matrix-vector product for a one-triangle triplet matrix.
pub fn sym_mul(a: &Triplets, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    for (r, c, v) in a.iter() {
        y[r] += v * x[c];
        if r != c {
            y[c] += v * x[r];
        }
    }
    y
}
