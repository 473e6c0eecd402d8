use gridopt_nlp::{
    check_derivatives, solve, solve_warm, LinearSolverChoice, NlpProblem, SolveStatus, SolverOptions,
    Triplets,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// min x² s.t. 1 - x ≤ 0
struct SquareAboveOne;

impl NlpProblem for SquareAboveOne {
    fn num_variables(&self) -> usize {
        1
    }
    fn num_equalities(&self) -> usize {
        0
    }
    fn num_inequalities(&self) -> usize {
        1
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![f64::NEG_INFINITY], vec![f64::INFINITY])
    }
    fn initial_point(&self) -> Vec<f64> {
        vec![3.0]
    }
    fn objective(&self, x: &[f64]) -> f64 {
        x[0] * x[0]
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![2.0 * x[0]]
    }
    fn equalities(&self, _: &[f64]) -> Vec<f64> {
        vec![]
    }
    fn equality_jacobian(&self, _: &[f64]) -> Triplets {
        Triplets::new(0, 1)
    }
    fn inequalities(&self, x: &[f64]) -> Vec<f64> {
        vec![1.0 - x[0]]
    }
    fn inequality_jacobian(&self, _: &[f64]) -> Triplets {
        let mut t = Triplets::new(1, 1);
        t.push(0, 0, -1.0);
        t
    }
    fn hessian(&self, _: &[f64], s: f64, _: &[f64], _: &[f64]) -> Option<Triplets> {
        let mut t = Triplets::new(1, 1);
        t.push(0, 0, 2.0 * s);
        Some(t)
    }
}

/// min -x - y s.t. x² + y² ≤ 1
struct LinearOverDisk;

impl NlpProblem for LinearOverDisk {
    fn num_variables(&self) -> usize {
        2
    }
    fn num_equalities(&self) -> usize {
        0
    }
    fn num_inequalities(&self) -> usize {
        1
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![f64::NEG_INFINITY; 2], vec![f64::INFINITY; 2])
    }
    fn initial_point(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }
    fn objective(&self, x: &[f64]) -> f64 {
        -x[0] - x[1]
    }
    fn gradient(&self, _: &[f64]) -> Vec<f64> {
        vec![-1.0, -1.0]
    }
    fn equalities(&self, _: &[f64]) -> Vec<f64> {
        vec![]
    }
    fn equality_jacobian(&self, _: &[f64]) -> Triplets {
        Triplets::new(0, 2)
    }
    fn inequalities(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0] * x[0] + x[1] * x[1] - 1.0]
    }
    fn inequality_jacobian(&self, x: &[f64]) -> Triplets {
        let mut t = Triplets::new(1, 2);
        t.push(0, 0, 2.0 * x[0]);
        t.push(0, 1, 2.0 * x[1]);
        t
    }
    fn hessian(&self, _: &[f64], _: f64, _: &[f64], m: &[f64]) -> Option<Triplets> {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 2.0 * m[0]);
        t.push(1, 1, 2.0 * m[0]);
        Some(t)
    }
}

/// Hock–Schittkowski problem 71.
struct Hs071 {
    with_hessian: bool,
}

impl NlpProblem for Hs071 {
    fn num_variables(&self) -> usize {
        4
    }
    fn num_equalities(&self) -> usize {
        1
    }
    fn num_inequalities(&self) -> usize {
        1
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![1.0; 4], vec![5.0; 4])
    }
    fn initial_point(&self) -> Vec<f64> {
        vec![1.0, 5.0, 5.0, 1.0]
    }
    fn objective(&self, x: &[f64]) -> f64 {
        x[0] * x[3] * (x[0] + x[1] + x[2]) + x[2]
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![
            x[3] * (2.0 * x[0] + x[1] + x[2]),
            x[0] * x[3],
            x[0] * x[3] + 1.0,
            x[0] * (x[0] + x[1] + x[2]),
        ]
    }
    fn equalities(&self, x: &[f64]) -> Vec<f64> {
        vec![x.iter().map(|v| v * v).sum::<f64>() - 40.0]
    }
    fn equality_jacobian(&self, x: &[f64]) -> Triplets {
        let mut t = Triplets::new(1, 4);
        for j in 0..4 {
            t.push(0, j, 2.0 * x[j]);
        }
        t
    }
    fn inequalities(&self, x: &[f64]) -> Vec<f64> {
        vec![25.0 - x[0] * x[1] * x[2] * x[3]]
    }
    fn inequality_jacobian(&self, x: &[f64]) -> Triplets {
        let mut t = Triplets::new(1, 4);
        t.push(0, 0, -x[1] * x[2] * x[3]);
        t.push(0, 1, -x[0] * x[2] * x[3]);
        t.push(0, 2, -x[0] * x[1] * x[3]);
        t.push(0, 3, -x[0] * x[1] * x[2]);
        t
    }
    fn hessian(&self, x: &[f64], s: f64, l: &[f64], m: &[f64]) -> Option<Triplets> {
        if !self.with_hessian {
            return None;
        }
        let mut t = Triplets::new(4, 4);
        // objective
        t.push(0, 0, s * 2.0 * x[3]);
        t.push(1, 0, s * x[3]);
        t.push(2, 0, s * x[3]);
        t.push(3, 0, s * (2.0 * x[0] + x[1] + x[2]));
        t.push(3, 1, s * x[0]);
        t.push(3, 2, s * x[0]);
        // equality
        for j in 0..4 {
            t.push(j, j, 2.0 * l[0]);
        }
        // inequality: -(x0 x1 x2 x3)
        let mu = -m[0];
        t.push(1, 0, mu * x[2] * x[3]);
        t.push(2, 0, mu * x[1] * x[3]);
        t.push(3, 0, mu * x[1] * x[2]);
        t.push(2, 1, mu * x[0] * x[3]);
        t.push(3, 1, mu * x[0] * x[2]);
        t.push(3, 2, mu * x[0] * x[1]);
        Some(t)
    }
}

/// Convex quadratic ½ xᵀ Q x + qᵀ x over a box.
struct BoxQp {
    q: Vec<Vec<f64>>,
    lin: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl NlpProblem for BoxQp {
    fn num_variables(&self) -> usize {
        self.lin.len()
    }
    fn num_equalities(&self) -> usize {
        0
    }
    fn num_inequalities(&self) -> usize {
        0
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.lo.clone(), self.hi.clone())
    }
    fn initial_point(&self) -> Vec<f64> {
        vec![0.0; self.lin.len()]
    }
    fn objective(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let mut f = 0.0;
        for i in 0..n {
            f += self.lin[i] * x[i];
            for j in 0..n {
                f += 0.5 * x[i] * self.q[i][j] * x[j];
            }
        }
        f
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|i| self.lin[i] + (0..x.len()).map(|j| self.q[i][j] * x[j]).sum::<f64>())
            .collect()
    }
    fn equalities(&self, _: &[f64]) -> Vec<f64> {
        vec![]
    }
    fn equality_jacobian(&self, x: &[f64]) -> Triplets {
        Triplets::new(0, x.len())
    }
    fn inequalities(&self, _: &[f64]) -> Vec<f64> {
        vec![]
    }
    fn inequality_jacobian(&self, x: &[f64]) -> Triplets {
        Triplets::new(0, x.len())
    }
    fn hessian(&self, x: &[f64], s: f64, _: &[f64], _: &[f64]) -> Option<Triplets> {
        let n = x.len();
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            for j in 0..=i {
                t.push(i, j, s * self.q[i][j]);
            }
        }
        Some(t)
    }
}

/// Independent oracle: projected gradient descent with a fixed step 1/L.
fn projected_gradient(p: &BoxQp, iters: usize) -> f64 {
    let n = p.lin.len();
    let lip: f64 = p.q.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut x = vec![0.0; n];
    for _ in 0..iters {
        let g = p.gradient(&x);
        for i in 0..n {
            x[i] = (x[i] - g[i] / lip).clamp(p.lo[i], p.hi[i]);
        }
    }
    p.objective(&x)
}

#[test]
fn square_above_one_has_unit_solution_and_multiplier_two() {
    let sol = solve(&SquareAboveOne, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Converged);
    assert!((sol.x[0] - 1.0).abs() < 1e-7, "x = {}", sol.x[0]);
    assert!((sol.ineq_multipliers[0] - 2.0).abs() < 1e-6);
    assert!(sol.kkt.max() <= 1e-8);
}

#[test]
fn linear_objective_over_disk() {
    let sol = solve(&LinearOverDisk, &SolverOptions::default()).unwrap();
    assert!(sol.converged());
    let r = std::f64::consts::FRAC_1_SQRT_2;
    assert!((sol.x[0] - r).abs() < 1e-7 && (sol.x[1] - r).abs() < 1e-7);
    // multiplier 1/√2 from -1 + 2 μ x = 0
    assert!((sol.ineq_multipliers[0] - r).abs() < 1e-6);
}

#[test]
fn hs071_reference_optimum() {
    let sol = solve(&Hs071 { with_hessian: true }, &SolverOptions::default()).unwrap();
    assert!(sol.converged(), "{:?}", sol.status);
    assert!((sol.objective - 17.014017289).abs() < 1e-6, "f = {}", sol.objective);
}

#[test]
fn hs071_with_quasi_newton_fallback() {
    let opts = SolverOptions {
        max_iter: 500,
        ..Default::default()
    };
    let sol = solve(&Hs071 { with_hessian: false }, &opts).unwrap();
    assert!(sol.converged(), "{:?}", sol.status);
    assert!((sol.objective - 17.014017289).abs() < 1e-6, "f = {}", sol.objective);
}

#[test]
fn sparse_and_dense_backends_agree() {
    let dense = solve(
        &Hs071 { with_hessian: true },
        &SolverOptions {
            linear_solver: LinearSolverChoice::Dense,
            ..Default::default()
        },
    )
    .unwrap();
    let sparse = solve(
        &Hs071 { with_hessian: true },
        &SolverOptions {
            linear_solver: LinearSolverChoice::Sparse,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(dense.converged() && sparse.converged());
    for (a, b) in dense.x.iter().zip(&sparse.x) {
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn accepted_steps_decrease_merit() {
    for sol in [
        solve(&Hs071 { with_hessian: true }, &SolverOptions::default()).unwrap(),
        solve(&LinearOverDisk, &SolverOptions::default()).unwrap(),
        solve(&SquareAboveOne, &SolverOptions::default()).unwrap(),
    ] {
        for rec in &sol.trace {
            assert!(rec.sufficient_decrease);
            assert!(
                rec.merit_after <= rec.merit_before + 1e-12 * rec.merit_before.abs().max(1.0),
                "merit rose at iteration {}: {} -> {}",
                rec.iteration,
                rec.merit_before,
                rec.merit_after
            );
        }
    }
}

#[test]
fn convex_box_qps_match_projected_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let n = 6;
        let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut q = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                q[i][j] = (0..n).map(|k| a[k][i] * a[k][j]).sum::<f64>() + if i == j { 0.5 } else { 0.0 };
            }
        }
        let p = BoxQp {
            q,
            lin: (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect(),
            lo: vec![-1.0; n],
            hi: vec![1.0; n],
        };
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert!(sol.converged());
        let oracle = projected_gradient(&p, 20000);
        assert!((sol.objective - oracle).abs() <= 1e-7 * (1.0 + oracle.abs()), "{} vs {}", sol.objective, oracle);
    }
}

#[test]
fn warm_start_converges_quickly() {
    let p = Hs071 { with_hessian: true };
    let opts = SolverOptions::default();
    let cold = solve(&p, &opts).unwrap();
    let warm = solve_warm(&p, &opts, Some(&cold)).unwrap();
    assert!(warm.converged());
    assert!(warm.iterations <= cold.iterations);
    assert!((warm.objective - cold.objective).abs() < 1e-7);
}

/// x ≥ 2 and x ≤ 1 cannot both hold.
struct Contradiction;

impl NlpProblem for Contradiction {
    fn num_variables(&self) -> usize {
        1
    }
    fn num_equalities(&self) -> usize {
        1
    }
    fn num_inequalities(&self) -> usize {
        0
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![-1.0], vec![1.0])
    }
    fn initial_point(&self) -> Vec<f64> {
        vec![0.0]
    }
    fn objective(&self, x: &[f64]) -> f64 {
        x[0]
    }
    fn gradient(&self, _: &[f64]) -> Vec<f64> {
        vec![1.0]
    }
    fn equalities(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0] * x[0] - 4.0]
    }
    fn equality_jacobian(&self, x: &[f64]) -> Triplets {
        let mut t = Triplets::new(1, 1);
        t.push(0, 0, 2.0 * x[0]);
        t
    }
    fn inequalities(&self, _: &[f64]) -> Vec<f64> {
        vec![]
    }
    fn inequality_jacobian(&self, _: &[f64]) -> Triplets {
        Triplets::new(0, 1)
    }
    fn hessian(&self, _: &[f64], _: f64, l: &[f64], _: &[f64]) -> Option<Triplets> {
        let mut t = Triplets::new(1, 1);
        t.push(0, 0, 2.0 * l[0]);
        Some(t)
    }
}

#[test]
fn infeasible_problem_is_not_reported_converged() {
    let sol = solve(
        &Contradiction,
        &SolverOptions {
            max_iter: 200,
            ..Default::default()
        },
    )
    .unwrap();
    assert_ne!(sol.status, SolveStatus::Converged);
}

#[test]
fn iteration_limit_is_reported() {
    let sol = solve(
        &Hs071 { with_hessian: true },
        &SolverOptions {
            max_iter: 2,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(sol.status, SolveStatus::MaxIterations);
    assert_eq!(sol.iterations, 2);
}

#[test]
fn inconsistent_bounds_are_rejected() {
    let p = BoxQp {
        q: vec![vec![1.0]],
        lin: vec![0.0],
        lo: vec![1.0],
        hi: vec![0.0],
    };
    assert!(solve(&p, &SolverOptions::default()).is_err());
}

#[test]
fn test_problem_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(1.1..4.9)).collect();
        let l = [rng.gen_range(-2.0..2.0)];
        let m = [rng.gen_range(0.0..2.0)];
        let r = check_derivatives(&Hs071 { with_hessian: true }, &x, &l, &m);
        assert!(r.max() <= 1e-5, "{r:?}");
    }
}
