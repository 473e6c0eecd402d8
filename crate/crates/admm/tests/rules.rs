use gridopt_admm::update::{consensus_target, local_residual, update_duals, update_penalty, update_z};
use gridopt_admm::{AdmmConfig, AdmmError, AugmentedProblem, ConfigError, Message, Weights};
use gridopt_nlp::{NlpProblem, Triplets};
use gridopt_partition::CouplingClass;

fn msg(iteration: u64, sender: u32, class: CouplingClass, values: Vec<f64>) -> Message {
    Message { iteration, sender, tie: 0, class, values }
}

#[test]
fn voltage_targets_are_means() {
    let z = update_z(
        3,
        &msg(3, 1, CouplingClass::Voltage, vec![1.02]),
        &msg(3, 2, CouplingClass::Voltage, vec![1.00]),
    )
    .unwrap();
    assert_eq!(z, vec![0.5 * (1.02 + 1.00)]);
    assert!((z[0] - 1.01).abs() <= f64::EPSILON);
}

#[test]
fn power_targets_are_half_differences() {
    let z = update_z(1, &msg(1, 1, CouplingClass::Power, vec![0.50]), &msg(1, 2, CouplingClass::Power, vec![-0.48]))
        .unwrap();
    assert_eq!(z, vec![0.5 * (0.50 + 0.48)]);
    assert!((z[0] - 0.49).abs() <= f64::EPSILON);
}

#[test]
fn agreeing_messages_reproduce_the_own_values() {
    let own_v = vec![1.013, -0.071];
    let own_s = vec![0.37, -0.12];
    let zv = update_z(5, &msg(5, 1, CouplingClass::Voltage, own_v.clone()), &msg(5, 2, CouplingClass::Voltage, own_v.clone()))
        .unwrap();
    let neg: Vec<f64> = own_s.iter().map(|v| -v).collect();
    let zs = update_z(5, &msg(5, 1, CouplingClass::Power, own_s.clone()), &msg(5, 2, CouplingClass::Power, neg)).unwrap();
    assert_eq!(zv, own_v);
    assert_eq!(zs, own_s);
    assert_eq!(local_residual(&own_v, &zv), 0.0);
    assert_eq!(local_residual(&own_s, &zs), 0.0);
}

#[test]
fn stale_messages_are_rejected() {
    let own = msg(4, 1, CouplingClass::Voltage, vec![1.0]);
    let old = msg(3, 2, CouplingClass::Voltage, vec![1.0]);
    match update_z(4, &own, &old) {
        Err(AdmmError::StaleMessage { expected: 4, got: 3, sender: 2 }) => {}
        other => panic!("expected a stale message error, got {other:?}"),
    }
}

#[test]
fn mismatched_messages_are_rejected() {
    let own = msg(1, 1, CouplingClass::Voltage, vec![1.0, 0.0]);
    let short = msg(1, 2, CouplingClass::Voltage, vec![1.0]);
    assert!(matches!(update_z(1, &own, &short), Err(AdmmError::MessageMismatch { tie: 0 })));
    let other_class = msg(1, 2, CouplingClass::Power, vec![1.0, 0.0]);
    assert!(matches!(update_z(1, &own, &other_class), Err(AdmmError::MessageMismatch { .. })));
}

#[test]
fn targets_are_idempotent() {
    let own = msg(2, 1, CouplingClass::Power, vec![0.3, -0.2]);
    let nb = msg(2, 2, CouplingClass::Power, vec![-0.25, 0.1]);
    assert_eq!(update_z(2, &own, &nb).unwrap(), update_z(2, &own, &nb).unwrap());
    assert_eq!(consensus_target(CouplingClass::Voltage, 1.0, 1.0), 1.0);
}

#[test]
fn dual_step_arithmetic() {
    let mut l = vec![0.0];
    update_duals(&mut l, 100.0, &[1.0], &[0.01], &[0.0]);
    assert_eq!(l, vec![100.0 * 0.01]);
    assert!((l[0] - 1.0).abs() <= f64::EPSILON);

    let mut l = vec![2.5, -1.0];
    update_duals(&mut l, 100.0, &[1.0, 100.0], &[0.3, 0.7], &[0.3, 0.7]);
    assert_eq!(l, vec![2.5, -1.0]);

    let mut l = vec![3.0];
    update_duals(&mut l, 100.0, &[100.0], &[1.001], &[1.0]);
    let expected = 3.0 + 100.0 * 100.0 * (1.001 - 1.0);
    assert_eq!(l, vec![expected]);
    assert!((l[0] - 13.0).abs() <= 1e-9);
}

#[test]
fn penalty_rule_arithmetic() {
    assert_eq!(update_penalty(100.0, 1.1, 0.99, 0.6, 0.5), (100.0, 0.5));
    assert_eq!(update_penalty(100.0, 1.1, 0.99, 0.5, 0.499), (1.1 * 100.0, 0.499));
    assert_eq!(update_penalty(100.0, 1.1, 0.99, f64::INFINITY, 3.7), (100.0, 3.7));
    assert_eq!(update_penalty(100.0, 1.1, 0.99, 0.0, 0.0), (100.0, 0.0));
    // Exactly Θ·Γ is sufficient decrease.
    assert_eq!(update_penalty(7.0, 2.0, 0.5, 0.5, 0.25), (7.0, 0.25));
}

#[test]
fn default_configuration() {
    let c = AdmmConfig::default();
    assert_eq!((c.rho0, c.tau, c.theta, c.eps, c.max_iterations), (100.0, 1.1, 0.99, 1e-3, 500));
    assert_eq!(c.weights, Weights { voltage: 100.0, power_ac: 1.0, power_dc: 10.0 });
    assert!(c.validate().is_ok());
    assert_eq!(c.penalty(0), 100.0);
    assert_eq!(c.penalty(2), 100.0 * 1.1f64.powi(2));
    assert!((c.penalty(2) - 121.0).abs() <= 1e-12);
}

#[test]
fn invalid_configurations_are_rejected() {
    let base = AdmmConfig::default();
    let cases: Vec<(AdmmConfig, fn(&ConfigError) -> bool)> = vec![
        (AdmmConfig { rho0: 0.0, ..base.clone() }, |e| matches!(e, ConfigError::Rho0(_))),
        (AdmmConfig { rho0: f64::NAN, ..base.clone() }, |e| matches!(e, ConfigError::Rho0(_))),
        (AdmmConfig { tau: 1.0, ..base.clone() }, |e| matches!(e, ConfigError::Tau(_))),
        (AdmmConfig { theta: 1.0, ..base.clone() }, |e| matches!(e, ConfigError::Theta(_))),
        (AdmmConfig { theta: 0.0, ..base.clone() }, |e| matches!(e, ConfigError::Theta(_))),
        (AdmmConfig { eps: 0.0, ..base.clone() }, |e| matches!(e, ConfigError::Eps(_))),
        (
            AdmmConfig { weights: Weights { power_dc: -1.0, ..Weights::default() }, ..base.clone() },
            |e| matches!(e, ConfigError::Weights(_)),
        ),
        (AdmmConfig { max_iterations: 0, ..base.clone() }, |e| matches!(e, ConfigError::MaxIterations)),
    ];
    for (cfg, check) in cases {
        let err = cfg.validate().unwrap_err();
        assert!(check(&err), "{err}");
    }
}

/// One free variable, no constraints, zero objective.
struct Flat;

impl NlpProblem for Flat {
    fn num_variables(&self) -> usize {
        1
    }
    fn num_equalities(&self) -> usize {
        0
    }
    fn num_inequalities(&self) -> usize {
        0
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![f64::NEG_INFINITY], vec![f64::INFINITY])
    }
    fn initial_point(&self) -> Vec<f64> {
        vec![0.0]
    }
    fn objective(&self, _: &[f64]) -> f64 {
        0.0
    }
    fn gradient(&self, _: &[f64]) -> Vec<f64> {
        vec![0.0]
    }
    fn equalities(&self, _: &[f64]) -> Vec<f64> {
        Vec::new()
    }
    fn equality_jacobian(&self, _: &[f64]) -> Triplets {
        Triplets::new(0, 1)
    }
    fn inequalities(&self, _: &[f64]) -> Vec<f64> {
        Vec::new()
    }
    fn inequality_jacobian(&self, _: &[f64]) -> Triplets {
        Triplets::new(0, 1)
    }
    fn hessian(&self, _: &[f64], _: f64, _: &[f64], _: &[f64]) -> Option<Triplets> {
        Some(Triplets::new(1, 1))
    }
}

#[test]
fn penalty_term_of_a_single_row() {
    let aug = AugmentedProblem::new(&Flat, &[0], &[0.0], &[1.0], &[1.0], 100.0).unwrap();
    let added = aug.augmentation(&[1.01]);
    let expected = 0.5 * 100.0 * (1.01f64 - 1.0).powi(2);
    assert_eq!(added, expected);
    assert!((added - 5e-3).abs() <= 1e-15);
    assert_eq!(aug.objective(&[1.01]), added);
}

#[test]
fn augmentation_vanishes_at_its_target() {
    let aug = AugmentedProblem::new(&Flat, &[0], &[0.0], &[0.7], &[100.0], 250.0).unwrap();
    assert_eq!(aug.augmentation(&[0.7]), 0.0);
    assert_eq!(aug.gradient(&[0.7]), vec![0.0]);
}

#[test]
fn augmentation_checks_dimensions() {
    assert!(matches!(AugmentedProblem::new(&Flat, &[0], &[0.0, 1.0], &[0.0], &[1.0], 1.0), Err(AdmmError::Dimension(_))));
    assert!(matches!(AugmentedProblem::new(&Flat, &[3], &[0.0], &[0.0], &[1.0], 1.0), Err(AdmmError::Dimension(_))));
}
