//! Primal-dual interior-point method with inertia-corrected Newton steps and an
//! ℓ1 merit line search.
//!
//! All inequality-type conditions, general `h(x) ≤ 0` rows and finite variable
//! bounds alike, are handled as `c(x) + s = 0, s > 0` with multipliers `z > 0`.
//! The slack and multiplier steps are eliminated, leaving the reduced system
//!
//! ```text
//!   [ H + Jcᵀ Σ Jc + δw I    Jgᵀ  ] [dx]   [ -N ]
//!   [ Jg                    -δc I ] [dλ] = [ -g ]
//! ```
//!
//! with `Σ = diag(z / s)`. `δw` is escalated geometrically until the matrix
//! has exactly `n` positive and `m` negative eigenvalues.

use log::{debug, trace};

use crate::bfgs::DampedBfgs;
use crate::linalg::{sym_mul, DenseBunchKaufman, Equilibrated, Inertia, SparseLdl, SymmetricFactor};
use crate::problem::NlpProblem;
use crate::sparse::Triplets;
use crate::NlpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearSolverChoice {
    /// Dense below `dense_threshold` variables, sparse above.
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Scaled KKT tolerance for stationarity, feasibility and complementarity.
    pub tol: f64,
    pub max_iter: usize,
    pub linear_solver: LinearSolverChoice,
    pub dense_threshold: usize,
    /// Centering parameter: the barrier target is `sigma · sᵀz / p`.
    pub sigma: f64,
    /// Relative distance a cold start is pushed inside the bounds.
    pub bound_push: f64,
    /// Same, for warm starts.
    pub warm_bound_push: f64,
    /// Lower floor for slacks and multipliers on a warm start.
    pub warm_floor: f64,
    /// Hessian-of-Lagrangian source; `false` forces the BFGS fallback.
    pub exact_hessian: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 300,
            linear_solver: LinearSolverChoice::Auto,
            dense_threshold: 200,
            sigma: 0.1,
            bound_push: 1e-2,
            warm_bound_push: 1e-6,
            warm_floor: 1e-6,
            exact_hessian: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Infeasible,
    NumericalFailure,
}

/// Scaled first-order optimality measures.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub feasibility: f64,
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.feasibility).max(self.complementarity)
    }
}

/// One accepted interior-point step.
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub mu: f64,
    /// Merit value before and after the step, both at this step's `mu` and
    /// penalty weight.
    pub merit_before: f64,
    pub merit_after: f64,
    pub step: f64,
    pub regularization: f64,
    pub residuals: KktResiduals,
    /// False when the line search gave up and a minimal step was forced.
    pub sufficient_decrease: bool,
}

#[derive(Debug, Clone)]
pub struct NlpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Multipliers of `g(x) = 0` in the Lagrangian `f + λᵀg + μᵀh`.
    pub eq_multipliers: Vec<f64>,
    /// Multipliers of `h(x) ≤ 0` (non-negative).
    pub ineq_multipliers: Vec<f64>,
    /// Multipliers of `x ≥ lo` (zero for infinite bounds).
    pub bound_lower: Vec<f64>,
    /// Multipliers of `x ≤ hi` (zero for infinite bounds).
    pub bound_upper: Vec<f64>,
    pub status: SolveStatus,
    pub kkt: KktResiduals,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
}

impl NlpSolution {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Indexing of the combined inequality set `c(x) = [h(x); x_ub - hi; lo - x_lb]`.
struct Layout {
    n: usize,
    me: usize,
    mi: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    ub: Vec<usize>,
    lb: Vec<usize>,
}

impl Layout {
    fn new(p: &dyn NlpProblem) -> Result<Self, NlpError> {
        let n = p.num_variables();
        let (lo, hi) = p.bounds();
        if lo.len() != n || hi.len() != n {
            return Err(NlpError::Dimension(format!(
                "bounds have length {}/{} for {n} variables",
                lo.len(),
                hi.len()
            )));
        }
        for j in 0..n {
            if lo[j] > hi[j] || lo[j].is_nan() || hi[j].is_nan() {
                return Err(NlpError::InvalidBounds {
                    index: j,
                    lo: lo[j],
                    hi: hi[j],
                });
            }
        }
        let ub = (0..n).filter(|&j| hi[j].is_finite()).collect();
        let lb = (0..n).filter(|&j| lo[j].is_finite()).collect();
        Ok(Self {
            n,
            me: p.num_equalities(),
            mi: p.num_inequalities(),
            lo,
            hi,
            ub,
            lb,
        })
    }

    fn p(&self) -> usize {
        self.mi + self.ub.len() + self.lb.len()
    }

    fn c(&self, h: &[f64], x: &[f64]) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.p());
        c.extend_from_slice(h);
        c.extend(self.ub.iter().map(|&j| x[j] - self.hi[j]));
        c.extend(self.lb.iter().map(|&j| self.lo[j] - x[j]));
        c
    }

    fn jc(&self, jh: &Triplets) -> Triplets {
        let mut t = Triplets::with_capacity(self.p(), self.n, jh.nnz() + self.ub.len() + self.lb.len());
        t.extend_shifted(jh, 0, 0);
        for (k, &j) in self.ub.iter().enumerate() {
            t.push(self.mi + k, j, 1.0);
        }
        for (k, &j) in self.lb.iter().enumerate() {
            t.push(self.mi + self.ub.len() + k, j, -1.0);
        }
        t
    }

    /// Pushes `x` strictly inside its bounds.
    fn push_inside(&self, x: &mut [f64], frac: f64) {
        for j in 0..self.n {
            let (l, u) = (self.lo[j], self.hi[j]);
            if l.is_finite() && u.is_finite() {
                let range = u - l;
                let pl = (frac * l.abs().max(1.0)).min(frac * range);
                let pu = (frac * u.abs().max(1.0)).min(frac * range);
                x[j] = x[j].clamp(l + pl, u - pu);
            } else if l.is_finite() {
                x[j] = x[j].max(l + frac * l.abs().max(1.0));
            } else if u.is_finite() {
                x[j] = x[j].min(u - frac * u.abs().max(1.0));
            }
        }
    }
}

struct Eval {
    f: f64,
    grad: Vec<f64>,
    g: Vec<f64>,
    jg: Triplets,
    c: Vec<f64>,
    jc: Triplets,
}

fn evaluate(p: &dyn NlpProblem, lay: &Layout, x: &[f64]) -> Eval {
    let h = p.inequalities(x);
    let c = lay.c(&h, x);
    Eval {
        f: p.objective(x),
        grad: p.gradient(x),
        g: p.equalities(x),
        jg: p.equality_jacobian(x),
        jc: lay.jc(&p.inequality_jacobian(x)),
        c,
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}

fn norm_1(v: &[f64]) -> f64 {
    v.iter().map(|a| a.abs()).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Directional derivative of `‖v‖₁` along `dv`.
fn l1_directional(v: &[f64], dv: &[f64]) -> f64 {
    v.iter()
        .zip(dv)
        .map(|(&a, &d)| if a > 0.0 { d } else if a < 0.0 { -d } else { d.abs() })
        .sum()
}

fn lagrangian_gradient(e: &Eval, lambda: &[f64], z: &[f64]) -> Vec<f64> {
    let mut r = e.grad.clone();
    for (i, v) in e.jg.tmul_vec(lambda).into_iter().enumerate() {
        r[i] += v;
    }
    for (i, v) in e.jc.tmul_vec(z).into_iter().enumerate() {
        r[i] += v;
    }
    r
}

fn residuals(lay: &Layout, e: &Eval, lambda: &[f64], z: &[f64], s: &[f64]) -> KktResiduals {
    let p = lay.p();
    let s_max = 100.0f64;
    let s_d = (s_max.max((norm_1(lambda) + norm_1(z)) / ((lay.me + p).max(1) as f64))) / s_max;
    let s_c = (s_max.max(norm_1(z) / (p.max(1) as f64))) / s_max;
    let lg = lagrangian_gradient(e, lambda, z);
    let cs: Vec<f64> = e.c.iter().zip(s).map(|(c, s)| c + s).collect();
    let comp = s.iter().zip(z).fold(0.0f64, |m, (s, z)| m.max((s * z).abs()));
    KktResiduals {
        stationarity: norm_inf(&lg) / s_d,
        feasibility: norm_inf(&e.g).max(norm_inf(&cs)),
        complementarity: comp / s_c,
    }
}

fn merit(f: f64, mu: f64, nu: f64, s: &[f64], g: &[f64], c: &[f64]) -> f64 {
    let barrier: f64 = if mu > 0.0 { s.iter().map(|v| v.ln()).sum::<f64>() } else { 0.0 };
    let infeas: f64 = norm_1(g) + c.iter().zip(s).map(|(c, s)| (c + s).abs()).sum::<f64>();
    f - mu * barrier + nu * infeas
}

fn fraction_to_boundary(v: &[f64], dv: &[f64], tau: f64) -> f64 {
    let mut alpha = 1.0f64;
    for (&a, &d) in v.iter().zip(dv) {
        if d < 0.0 {
            alpha = alpha.min(-tau * a / d);
        }
    }
    alpha
}

/// Reduced-system solver with inertia correction.
struct NewtonSystem {
    dense: bool,
    dense_f: Equilibrated<DenseBunchKaufman>,
    sparse_f: Equilibrated<SparseLdl>,
    last_delta_w: f64,
}

struct NewtonStep {
    dx: Vec<f64>,
    dlambda: Vec<f64>,
    delta_w: f64,
    /// `dxᵀ (H + Jcᵀ Σ Jc + δw I) dx`
    curvature: f64,
}

impl NewtonSystem {
    fn factor_with(&mut self, k: &Triplets) -> Inertia {
        if self.dense {
            self.dense_f.factor(k)
        } else {
            self.sparse_f.factor(k)
        }
    }

    fn back_solve(&self, b: &[f64]) -> Vec<f64> {
        if self.dense {
            self.dense_f.solve(b)
        } else {
            self.sparse_f.solve(b)
        }
    }

    fn compute(
        &mut self,
        n: usize,
        m: &Triplets,
        jg: &Triplets,
        rhs: &[f64],
        mu: f64,
    ) -> Result<NewtonStep, NlpError> {
        let me = jg.nrows();
        let build = |dw: f64, dc: f64| {
            let mut k = Triplets::with_capacity(n + me, n + me, m.nnz() + jg.nnz() + n + me);
            k.extend_shifted(m, 0, 0);
            for (r, c, v) in jg.iter() {
                k.push(n + r, c, v);
            }
            for i in 0..n {
                k.push(i, i, dw);
            }
            for r in 0..me {
                k.push(n + r, n + r, -dc);
            }
            k
        };
        // The static pivot order of the sparse path needs a nonzero
        // constraint-block diagonal; refinement below removes its effect.
        let static_dc = if self.dense { 0.0 } else { 1e-9 };
        let mut delta_c = 0.0f64;
        let mut delta_w = 0.0f64;
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > 80 {
                return Err(NlpError::SingularSystem);
            }
            let k = build(delta_w, delta_c.max(static_dc));
            let inertia = self.factor_with(&k);
            trace!("inertia {:?} with δw={delta_w:e} δc={delta_c:e}", inertia);
            if inertia.zero == 0 && inertia.positive == n && inertia.negative == me {
                if delta_w > 0.0 {
                    self.last_delta_w = delta_w;
                }
                let target = build(delta_w, delta_c);
                let mut sol = self.back_solve(rhs);
                for _ in 0..(if self.dense { 1 } else { 4 }) {
                    let ax = sym_mul(&target, &sol);
                    let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
                    if norm_inf(&r) <= 1e-14 * (1.0 + norm_inf(rhs)) {
                        break;
                    }
                    let corr = self.back_solve(&r);
                    for (s, c) in sol.iter_mut().zip(corr) {
                        *s += c;
                    }
                }
                let dx = sol[..n].to_vec();
                let mut mdx = sym_mul(m, &dx);
                for (v, d) in mdx.iter_mut().zip(&dx) {
                    *v += delta_w * d;
                }
                let curvature = dot(&dx, &mdx);
                return Ok(NewtonStep {
                    dlambda: sol[n..].to_vec(),
                    dx,
                    delta_w,
                    curvature,
                });
            }
            if inertia.zero > 0 && delta_c == 0.0 && me > 0 {
                delta_c = 1e-8 * mu.max(1e-16).powf(0.25);
                continue;
            }
            delta_w = if delta_w == 0.0 {
                if self.last_delta_w == 0.0 {
                    1e-4
                } else {
                    (self.last_delta_w / 3.0).max(1e-20)
                }
            } else if self.last_delta_w == 0.0 {
                100.0 * delta_w
            } else {
                8.0 * delta_w
            };
            if delta_w > 1e40 {
                return Err(NlpError::SingularSystem);
            }
        }
    }
}

/// Solves `p` from its own initial point.
pub fn solve(p: &dyn NlpProblem, opts: &SolverOptions) -> Result<NlpSolution, NlpError> {
    solve_warm(p, opts, None)
}

/// Solves `p`, optionally starting from a previous primal-dual solution of a
/// problem with the same structure.
pub fn solve_warm(
    p: &dyn NlpProblem,
    opts: &SolverOptions,
    warm: Option<&NlpSolution>,
) -> Result<NlpSolution, NlpError> {
    let lay = Layout::new(p)?;
    let (n, me, np) = (lay.n, lay.me, lay.p());

    // Starting point.
    let (mut x, mut lambda, z_init, push, floor) = match warm {
        Some(w) if w.x.len() == n && w.eq_multipliers.len() == me && w.ineq_multipliers.len() == lay.mi => {
            let mut z = w.ineq_multipliers.clone();
            z.extend(lay.ub.iter().map(|&j| w.bound_upper[j]));
            z.extend(lay.lb.iter().map(|&j| w.bound_lower[j]));
            (w.x.clone(), w.eq_multipliers.clone(), Some(z), opts.warm_bound_push, opts.warm_floor)
        }
        Some(_) => return Err(NlpError::Dimension("warm start does not match problem".into())),
        None => (p.initial_point(), vec![0.0; me], None, opts.bound_push, 1.0),
    };
    if x.len() != n {
        return Err(NlpError::Dimension(format!("initial point has length {} for {n} variables", x.len())));
    }
    lay.push_inside(&mut x, push);

    let mut e = evaluate(p, &lay, &x);
    let mut s: Vec<f64> = e.c.iter().map(|c| (-c).max(floor)).collect();
    let mut z: Vec<f64> = match z_init {
        Some(z) => z.into_iter().map(|v| v.max(floor)).collect(),
        None => s.iter().map(|s| 1.0 / s).collect(),
    };

    let use_dense = match opts.linear_solver {
        LinearSolverChoice::Dense => true,
        LinearSolverChoice::Sparse => false,
        LinearSolverChoice::Auto => n < opts.dense_threshold,
    };
    let mut system = NewtonSystem {
        dense: use_dense,
        dense_f: Equilibrated::new(DenseBunchKaufman::new()),
        sparse_f: Equilibrated::new(SparseLdl::new()),
        last_delta_w: 0.0,
    };
    let mut bfgs: Option<DampedBfgs> = None;
    let mut prev_for_bfgs: Option<(Vec<f64>, Eval)> = None;

    let mut nu = 1.0f64;
    let mut trace = Vec::new();
    let mut failed_searches = 0usize;
    let mut status = SolveStatus::MaxIterations;
    let mut kkt = residuals(&lay, &e, &lambda, &z, &s);
    let mut iterations = 0;
    let mut theta_history: Vec<f64> = Vec::new();

    for iter in 0..=opts.max_iter {
        kkt = residuals(&lay, &e, &lambda, &z, &s);
        if !kkt.max().is_finite() {
            status = SolveStatus::NumericalFailure;
            break;
        }
        if kkt.max() <= opts.tol {
            status = SolveStatus::Converged;
            break;
        }
        if iter == opts.max_iter {
            break;
        }
        iterations = iter + 1;

        let mu = if np > 0 {
            (opts.sigma * dot(&s, &z) / np as f64).max(opts.tol * 1e-2)
        } else {
            0.0
        };

        // Hessian of the Lagrangian.
        let hess = if opts.exact_hessian {
            p.hessian(&x, 1.0, &lambda, &z[..lay.mi])
        } else {
            None
        };
        let hess = match hess {
            Some(h) => h,
            None => {
                let b = bfgs.get_or_insert_with(|| DampedBfgs::new(n));
                if let Some((px, pe)) = prev_for_bfgs.take() {
                    let zg = &z[..lay.mi];
                    let yn = lagrangian_gradient_general(&e, &lambda, zg);
                    let yo = lagrangian_gradient_general(&pe, &lambda, zg);
                    let y: Vec<f64> = yn.iter().zip(&yo).map(|(a, b)| a - b).collect();
                    let step: Vec<f64> = x.iter().zip(&px).map(|(a, b)| a - b).collect();
                    b.update(&step, &y);
                }
                b.lower_triangle()
            }
        };

        // M = H + Jcᵀ Σ Jc, lower triangle.
        let sigma: Vec<f64> = z.iter().zip(&s).map(|(z, s)| z / s).collect();
        let mut mmat = hess;
        for (r, mut row) in e.jc.by_row().into_iter().enumerate() {
            let w = sigma[r];
            row.sort_unstable_by_key(|e| e.0);
            row.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
            for (a, &(ca, va)) in row.iter().enumerate() {
                for &(cb, vb) in &row[..=a] {
                    mmat.push(ca, cb, w * va * vb);
                }
            }
        }

        // N = ∇f + Jgᵀλ + Jcᵀ (z + (z∘c + μ) / s)
        let w: Vec<f64> = (0..np).map(|i| z[i] + (z[i] * e.c[i] + mu) / s[i]).collect();
        let mut nvec = e.grad.clone();
        for (i, v) in e.jg.tmul_vec(&lambda).into_iter().enumerate() {
            nvec[i] += v;
        }
        for (i, v) in e.jc.tmul_vec(&w).into_iter().enumerate() {
            nvec[i] += v;
        }
        let mut rhs: Vec<f64> = nvec.iter().map(|v| -v).collect();
        rhs.extend(e.g.iter().map(|v| -v));

        let step = match system.compute(n, &mmat, &e.jg, &rhs, mu) {
            Ok(st) => st,
            Err(err) => {
                debug!("newton system failed: {err}");
                status = SolveStatus::NumericalFailure;
                break;
            }
        };
        let dx = &step.dx;
        let jcdx = e.jc.mul_vec(dx);
        let ds: Vec<f64> = (0..np).map(|i| -(e.c[i] + s[i]) - jcdx[i]).collect();
        let dz: Vec<f64> = (0..np).map(|i| mu / s[i] - z[i] - z[i] / s[i] * ds[i]).collect();

        let tau = (1.0 - mu).max(0.99);
        let alpha_p = fraction_to_boundary(&s, &ds, tau);
        let alpha_z = fraction_to_boundary(&z, &dz, tau);

        // Penalty weight and directional derivative of the merit function.
        let jgdx = e.jg.mul_vec(dx);
        let cs: Vec<f64> = (0..np).map(|i| e.c[i] + s[i]).collect();
        let dcs: Vec<f64> = (0..np).map(|i| jcdx[i] + ds[i]).collect();
        let d_infeas = l1_directional(&e.g, &jgdx) + l1_directional(&cs, &dcs);
        let d_barrier = dot(&e.grad, dx) - if mu > 0.0 { (0..np).map(|i| mu * ds[i] / s[i]).sum::<f64>() } else { 0.0 };
        if d_infeas < 0.0 {
            let required = (d_barrier + 0.5 * step.curvature.max(0.0)) / (-0.9 * d_infeas);
            if required > nu {
                nu = required + 1.0;
            }
        }
        let d_merit = d_barrier + nu * d_infeas;
        let merit_before = merit(e.f, mu, nu, &s, &e.g, &e.c);

        let mut alpha = alpha_p;
        let mut accepted: Option<(Vec<f64>, Vec<f64>, Eval, f64)> = None;
        for _ in 0..40 {
            let xt: Vec<f64> = x.iter().zip(dx).map(|(a, d)| a + alpha * d).collect();
            let st: Vec<f64> = s.iter().zip(&ds).map(|(a, d)| a + alpha * d).collect();
            let et = evaluate(p, &lay, &xt);
            let mt = merit(et.f, mu, nu, &st, &et.g, &et.c);
            // Allow for roundoff in the merit value itself.
            let slack = 10.0 * f64::EPSILON * merit_before.abs().max(1.0);
            if mt.is_finite() && mt <= merit_before + 1e-4 * alpha * d_merit.min(0.0) + slack {
                accepted = Some((xt, st, et, mt));
                break;
            }
            alpha *= 0.5;
        }
        let sufficient = accepted.is_some();
        let (xn, sn, en, merit_after) = match accepted {
            Some(a) => {
                failed_searches = 0;
                a
            }
            None => {
                failed_searches += 1;
                alpha = alpha_p * 1e-3;
                let xt: Vec<f64> = x.iter().zip(dx).map(|(a, d)| a + alpha * d).collect();
                let st: Vec<f64> = s.iter().zip(&ds).map(|(a, d)| a + alpha * d).collect();
                let et = evaluate(p, &lay, &xt);
                let mt = merit(et.f, mu, nu, &st, &et.g, &et.c);
                (xt, st, et, mt)
            }
        };

        if !opts.exact_hessian || bfgs.is_some() {
            prev_for_bfgs = Some((x.clone(), e));
        }
        x = xn;
        s = sn;
        e = en;
        for (l, d) in lambda.iter_mut().zip(&step.dlambda) {
            *l += alpha_z * d;
        }
        for i in 0..np {
            z[i] += alpha_z * dz[i];
            // Keep z within a bounded ratio of the primal-dual target.
            if mu > 0.0 {
                let lo = mu / (1e10 * s[i]);
                let hi = 1e10 * mu / s[i];
                z[i] = z[i].clamp(lo, hi);
            }
        }

        trace.push(IterationRecord {
            iteration: iter,
            objective: e.f,
            mu,
            merit_before,
            merit_after,
            step: alpha,
            regularization: step.delta_w,
            residuals: kkt,
            sufficient_decrease: sufficient,
        });
        trace!(
            "it {iter:3} f={:.8e} μ={mu:.2e} α={alpha:.2e} δw={:.1e} kkt=({:.1e},{:.1e},{:.1e})",
            e.f,
            step.delta_w,
            kkt.stationarity,
            kkt.feasibility,
            kkt.complementarity
        );

        let theta = norm_inf(&e.g).max(norm_inf(&e.c.iter().map(|c| c.max(0.0)).collect::<Vec<_>>()));
        theta_history.push(theta);
        if failed_searches >= 15 {
            status = if theta > 1e-4 { SolveStatus::Infeasible } else { SolveStatus::NumericalFailure };
            break;
        }
        if theta_history.len() > 60 {
            let old = theta_history[theta_history.len() - 50];
            if theta > 1e-3 && theta > 0.9 * old && nu > 1e12 {
                status = SolveStatus::Infeasible;
                break;
            }
        }
    }

    if status == SolveStatus::Converged {
        kkt = residuals(&lay, &e, &lambda, &z, &s);
    }
    let mut bound_lower = vec![0.0; n];
    let mut bound_upper = vec![0.0; n];
    for (k, &j) in lay.ub.iter().enumerate() {
        bound_upper[j] = z[lay.mi + k];
    }
    for (k, &j) in lay.lb.iter().enumerate() {
        bound_lower[j] = z[lay.mi + lay.ub.len() + k];
    }
    debug!("nlp finished: {:?} after {iterations} iterations, f={:.10e}", status, e.f);
    Ok(NlpSolution {
        objective: e.f,
        eq_multipliers: lambda,
        ineq_multipliers: z[..lay.mi].to_vec(),
        bound_lower,
        bound_upper,
        status,
        kkt,
        iterations,
        trace,
        x,
    })
}

fn lagrangian_gradient_general(e: &Eval, lambda: &[f64], zg: &[f64]) -> Vec<f64> {
    let mut r = e.grad.clone();
    for (i, v) in e.jg.tmul_vec(lambda).into_iter().enumerate() {
        r[i] += v;
    }
    for (row, col, v) in e.jc.iter() {
        if row < zg.len() {
            r[col] += v * zg[row];
        }
    }
    r
}
