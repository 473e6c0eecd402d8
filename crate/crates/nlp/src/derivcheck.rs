//! Central finite-difference audit of the derivative callbacks of an
//! [`NlpProblem`](crate::NlpProblem).

use crate::problem::NlpProblem;

/// Largest relative errors found, measured as `|analytic - fd| / max(1, |fd|)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DerivativeReport {
    pub gradient: f64,
    pub equality_jacobian: f64,
    pub inequality_jacobian: f64,
    pub hessian: f64,
}

impl DerivativeReport {
    pub fn max(&self) -> f64 {
        self.gradient
            .max(self.equality_jacobian)
            .max(self.inequality_jacobian)
            .max(self.hessian)
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            gradient: self.gradient.max(other.gradient),
            equality_jacobian: self.equality_jacobian.max(other.equality_jacobian),
            inequality_jacobian: self.inequality_jacobian.max(other.inequality_jacobian),
            hessian: self.hessian.max(other.hessian),
        }
    }
}

fn rel(a: f64, fd: f64) -> f64 {
    (a - fd).abs() / fd.abs().max(1.0)
}

fn perturbed(x: &[f64], j: usize, h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[j] += h;
    y
}

fn step_for(v: f64) -> f64 {
    1e-6 * v.abs().max(1.0)
}

/// Compares analytic first derivatives (and the Hessian of the Lagrangian for
/// the given multipliers, when the problem supplies one) with central
/// differences at `x`.
pub fn check_derivatives(
    p: &dyn NlpProblem,
    x: &[f64],
    eq_mult: &[f64],
    ineq_mult: &[f64],
) -> DerivativeReport {
    let n = p.num_variables();
    let mut report = DerivativeReport::default();

    let grad = p.gradient(x);
    let jg = p.equality_jacobian(x).to_dense();
    let jh = p.inequality_jacobian(x).to_dense();
    for j in 0..n {
        let h = step_for(x[j]);
        let (xp, xm) = (perturbed(x, j, h), perturbed(x, j, -h));
        let fd = (p.objective(&xp) - p.objective(&xm)) / (2.0 * h);
        report.gradient = report.gradient.max(rel(grad[j], fd));

        let (gp, gm) = (p.equalities(&xp), p.equalities(&xm));
        for (i, row) in jg.iter().enumerate() {
            let fd = (gp[i] - gm[i]) / (2.0 * h);
            report.equality_jacobian = report.equality_jacobian.max(rel(row[j], fd));
        }
        let (hp, hm) = (p.inequalities(&xp), p.inequalities(&xm));
        for (i, row) in jh.iter().enumerate() {
            let fd = (hp[i] - hm[i]) / (2.0 * h);
            report.inequality_jacobian = report.inequality_jacobian.max(rel(row[j], fd));
        }
    }

    if let Some(hess) = p.hessian(x, 1.0, eq_mult, ineq_mult) {
        let hd = hess.symmetric_to_dense();
        let lag_grad = |y: &[f64]| {
            let mut g = p.gradient(y);
            for (i, v) in p.equality_jacobian(y).tmul_vec(eq_mult).into_iter().enumerate() {
                g[i] += v;
            }
            for (i, v) in p.inequality_jacobian(y).tmul_vec(ineq_mult).into_iter().enumerate() {
                g[i] += v;
            }
            g
        };
        for j in 0..n {
            let h = step_for(x[j]);
            let gp = lag_grad(&perturbed(x, j, h));
            let gm = lag_grad(&perturbed(x, j, -h));
            for i in 0..n {
                let fd = (gp[i] - gm[i]) / (2.0 * h);
                report.hessian = report.hessian.max(rel(hd[i][j], fd));
            }
        }
    }
    report
}
