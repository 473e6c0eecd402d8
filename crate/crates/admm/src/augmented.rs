use gridopt_nlp::{NlpProblem, Triplets};

use gridopt_partition::Partition;

use crate::AdmmError;

/// A regional OPF plus the dual and penalty terms on its coupling rows:
///
/// ```text
///   f(x) + Σ_r λ_r x_{v(r)} + ρ/2 Σ_r w_r (x_{v(r)} − z_r)²
/// ```
///
/// `v(r)` is the boundary variable of local row `r`. Constraints are those
/// of the wrapped problem.
#[derive(Debug, Clone)]
pub struct AugmentedProblem<'a, P: NlpProblem> {
    pub base: &'a P,
    pub variables: &'a [usize],
    pub lambda: &'a [f64],
    pub z: &'a [f64],
    pub weights: &'a [f64],
    pub rho: f64,
}

impl<'a, P: NlpProblem> AugmentedProblem<'a, P> {
    pub fn new(
        base: &'a P,
        variables: &'a [usize],
        lambda: &'a [f64],
        z: &'a [f64],
        weights: &'a [f64],
        rho: f64,
    ) -> Result<Self, AdmmError> {
        let r = variables.len();
        if lambda.len() != r || z.len() != r || weights.len() != r {
            return Err(AdmmError::Dimension(format!(
                "{r} coupling rows but {} duals, {} targets, {} weights",
                lambda.len(),
                z.len(),
                weights.len()
            )));
        }
        if let Some(&v) = variables.iter().find(|&&v| v >= base.num_variables()) {
            return Err(AdmmError::Dimension(format!("boundary variable {v} out of range")));
        }
        Ok(Self { base, variables, lambda, z, weights, rho })
    }

    /// The added terms alone.
    pub fn augmentation(&self, x: &[f64]) -> f64 {
        let mut dual = 0.0;
        let mut penalty = 0.0;
        for (r, &v) in self.variables.iter().enumerate() {
            let d = x[v] - self.z[r];
            dual += self.lambda[r] * x[v];
            penalty += self.weights[r] * d * d;
        }
        dual + 0.5 * self.rho * penalty
    }
}

impl<P: NlpProblem> NlpProblem for AugmentedProblem<'_, P> {
    fn num_variables(&self) -> usize {
        self.base.num_variables()
    }
    fn num_equalities(&self) -> usize {
        self.base.num_equalities()
    }
    fn num_inequalities(&self) -> usize {
        self.base.num_inequalities()
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        self.base.bounds()
    }
    fn initial_point(&self) -> Vec<f64> {
        self.base.initial_point()
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.base.objective(x) + self.augmentation(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.base.gradient(x);
        for (r, &v) in self.variables.iter().enumerate() {
            g[v] += self.lambda[r] + self.rho * self.weights[r] * (x[v] - self.z[r]);
        }
        g
    }

    fn equalities(&self, x: &[f64]) -> Vec<f64> {
        self.base.equalities(x)
    }
    fn equality_jacobian(&self, x: &[f64]) -> Triplets {
        self.base.equality_jacobian(x)
    }
    fn inequalities(&self, x: &[f64]) -> Vec<f64> {
        self.base.inequalities(x)
    }
    fn inequality_jacobian(&self, x: &[f64]) -> Triplets {
        self.base.inequality_jacobian(x)
    }

    fn hessian(&self, x: &[f64], obj_factor: f64, eq_mult: &[f64], ineq_mult: &[f64]) -> Option<Triplets> {
        let mut h = self.base.hessian(x, obj_factor, eq_mult, ineq_mult)?;
        for (r, &v) in self.variables.iter().enumerate() {
            h.push(v, v, obj_factor * self.rho * self.weights[r]);
        }
        Some(h)
    }
}

/// All regional problems side by side, joined by the consensus rows
/// `Σ_k A_k x_k = 0` appended after the regional equalities.
///
/// Equivalent to the original OPF. The multipliers of the consensus rows are
/// the duals that make its optimum a fixed point of the iteration.
#[derive(Debug, Clone)]
pub struct CoupledProblem<'a> {
    pub partition: &'a Partition,
    offsets: Vec<usize>,
    eq_offsets: Vec<usize>,
    ineq_offsets: Vec<usize>,
    start: Option<Vec<f64>>,
}

impl<'a> CoupledProblem<'a> {
    pub fn new(partition: &'a Partition) -> Self {
        let mut offsets = vec![0];
        let mut eq_offsets = vec![0];
        let mut ineq_offsets = vec![0];
        for rp in &partition.regions {
            let p = &rp.problem;
            offsets.push(offsets.last().unwrap() + p.num_variables());
            eq_offsets.push(eq_offsets.last().unwrap() + p.num_equalities());
            ineq_offsets.push(ineq_offsets.last().unwrap() + p.num_inequalities());
        }
        Self { partition, offsets, eq_offsets, ineq_offsets, start: None }
    }

    /// Starts the solver from the stacked regional points `xs`.
    pub fn starting_from(mut self, xs: &[Vec<f64>]) -> Self {
        self.start = Some(self.join(xs));
        self
    }

    /// Stacks regional points.
    pub fn join(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        xs.concat()
    }

    /// Splits a stacked point into regional points.
    pub fn split(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.offsets.windows(2).map(|w| x[w[0]..w[1]].to_vec()).collect()
    }

    /// Index of the first consensus row among the equalities.
    pub fn consensus_offset(&self) -> usize {
        *self.eq_offsets.last().unwrap()
    }

    fn regions(&self) -> impl Iterator<Item = (usize, &gridopt_opf::OpfProblem)> + '_ {
        self.partition.regions.iter().enumerate().map(|(k, rp)| (k, &rp.problem))
    }

    fn local<'x>(&self, k: usize, x: &'x [f64]) -> &'x [f64] {
        &x[self.offsets[k]..self.offsets[k + 1]]
    }

    fn stacked(&self, rows: usize, blocks: impl Iterator<Item = (usize, usize, Triplets)>) -> Triplets {
        let n = *self.offsets.last().unwrap();
        let mut t = Triplets::new(rows, n);
        for (r0, c0, b) in blocks {
            t.extend_shifted(&b, r0, c0);
        }
        t
    }
}

impl NlpProblem for CoupledProblem<'_> {
    fn num_variables(&self) -> usize {
        *self.offsets.last().unwrap()
    }
    fn num_equalities(&self) -> usize {
        self.consensus_offset() + self.partition.num_rows()
    }
    fn num_inequalities(&self) -> usize {
        *self.ineq_offsets.last().unwrap()
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        for (_, p) in self.regions() {
            let (l, h) = p.bounds();
            lo.extend(l);
            hi.extend(h);
        }
        (lo, hi)
    }

    fn initial_point(&self) -> Vec<f64> {
        match &self.start {
            Some(x) => x.clone(),
            None => self.regions().flat_map(|(_, p)| p.initial_point()).collect(),
        }
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.regions().map(|(k, p)| p.objective(self.local(k, x))).sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.regions().flat_map(|(k, p)| p.gradient(self.local(k, x))).collect()
    }

    fn equalities(&self, x: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = self.regions().flat_map(|(k, p)| p.equalities(self.local(k, x))).collect();
        g.extend(self.partition.consensus_residual(&self.split(x)));
        g
    }

    fn equality_jacobian(&self, x: &[f64]) -> Triplets {
        let mut j = self.stacked(
            self.num_equalities(),
            self.regions().map(|(k, p)| (self.eq_offsets[k], self.offsets[k], p.equality_jacobian(self.local(k, x)))),
        );
        let c0 = self.consensus_offset();
        for c in &self.partition.constraints {
            for (k, v, coeff) in c.terms {
                j.push(c0 + c.row, self.offsets[k] + v, coeff);
            }
        }
        j
    }

    fn inequalities(&self, x: &[f64]) -> Vec<f64> {
        self.regions().flat_map(|(k, p)| p.inequalities(self.local(k, x))).collect()
    }

    fn inequality_jacobian(&self, x: &[f64]) -> Triplets {
        self.stacked(
            self.num_inequalities(),
            self.regions()
                .map(|(k, p)| (self.ineq_offsets[k], self.offsets[k], p.inequality_jacobian(self.local(k, x)))),
        )
    }

    fn hessian(&self, x: &[f64], obj_factor: f64, eq_mult: &[f64], ineq_mult: &[f64]) -> Option<Triplets> {
        let n = self.num_variables();
        let mut h = Triplets::new(n, n);
        for (k, p) in self.regions() {
            let le = &eq_mult[self.eq_offsets[k]..self.eq_offsets[k + 1]];
            let li = &ineq_mult[self.ineq_offsets[k]..self.ineq_offsets[k + 1]];
            let b = p.hessian(self.local(k, x), obj_factor, le, li)?;
            h.extend_shifted(&b, self.offsets[k], self.offsets[k]);
        }
        Some(h)
    }
}
