use crate::sparse::Triplets;

/// A smooth constrained minimization problem
///
/// ```text
///   min  f(x)
///   s.t. g(x) = 0
///        h(x) <= 0
///        lo <= x <= hi
/// ```
///
/// Equalities are kept as their own block rather than folded into pairs of
/// inequalities. Infinite bounds mark free variables.
pub trait NlpProblem {
    fn num_variables(&self) -> usize;
    fn num_equalities(&self) -> usize;
    fn num_inequalities(&self) -> usize;

    /// Variable bounds `(lo, hi)`.
    fn bounds(&self) -> (Vec<f64>, Vec<f64>);
    fn initial_point(&self) -> Vec<f64>;

    fn objective(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn equalities(&self, x: &[f64]) -> Vec<f64>;
    fn equality_jacobian(&self, x: &[f64]) -> Triplets;

    fn inequalities(&self, x: &[f64]) -> Vec<f64>;
    fn inequality_jacobian(&self, x: &[f64]) -> Triplets;

    /// One triangle of `∇²(σ f + λᵀ g + μᵀ h)`: each off-diagonal pair appears
    /// once. Returning `None` selects the quasi-Newton fallback.
    fn hessian(
        &self,
        _x: &[f64],
        _obj_factor: f64,
        _eq_mult: &[f64],
        _ineq_mult: &[f64],
    ) -> Option<Triplets> {
        None
    }
}

impl<P: NlpProblem + ?Sized> NlpProblem for &P {
    fn num_variables(&self) -> usize {
        (**self).num_variables()
    }
    fn num_equalities(&self) -> usize {
        (**self).num_equalities()
    }
    fn num_inequalities(&self) -> usize {
        (**self).num_inequalities()
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (**self).bounds()
    }
    fn initial_point(&self) -> Vec<f64> {
        (**self).initial_point()
    }
    fn objective(&self, x: &[f64]) -> f64 {
        (**self).objective(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
    fn equalities(&self, x: &[f64]) -> Vec<f64> {
        (**self).equalities(x)
    }
    fn equality_jacobian(&self, x: &[f64]) -> Triplets {
        (**self).equality_jacobian(x)
    }
    fn inequalities(&self, x: &[f64]) -> Vec<f64> {
        (**self).inequalities(x)
    }
    fn inequality_jacobian(&self, x: &[f64]) -> Triplets {
        (**self).inequality_jacobian(x)
    }
    fn hessian(&self, x: &[f64], s: f64, l: &[f64], m: &[f64]) -> Option<Triplets> {
        (**self).hessian(x, s, l, m)
    }
}
