use aca_ode::dynamics::{ThreeBody, GRAVITATIONAL_CONSTANT};
use aca_ode::gradients::{GradientEstimator, Method};
use aca_ode::optimize::{
    fit, trajectory_mse, trajectory_mse_loss, MseOptions, OptimizerConfig, OptimizerKind,
    Parameterization, ReferenceSystem, Split, TrajectoryDataset, REFERENCE_G, REFERENCE_MASSES,
};
use aca_ode::solvers::Solver;
use aca_ode::vector::ParameterVector;

fn masses(scale: [f64; 3]) -> ParameterVector {
    ParameterVector::new(
        REFERENCE_MASSES
            .iter()
            .zip(scale)
            .map(|(m, s)| m * s)
            .collect(),
    )
    .unwrap()
}

fn short_dataset() -> TrajectoryDataset {
    let times = ReferenceSystem::sample_times(40, 2);
    let sys = ReferenceSystem::canonical();
    sys.generate(&times, &ReferenceSystem::generation_solver())
        .unwrap()
}

#[test]
fn committed_fixture_matches_regeneration() {
    let fixture = ReferenceSystem::load_fixture().unwrap();
    let fresh = ReferenceSystem::reference_dataset().unwrap();
    assert_eq!(fixture.len(), fresh.len());
    for (a, b) in fixture.states().iter().zip(fresh.states()) {
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0), "{x} vs {y}");
        }
    }
    assert_eq!(fixture.times(), fresh.times());
}

#[test]
fn fixture_conserves_energy_and_momentum() {
    let data = ReferenceSystem::load_fixture().unwrap();
    let body = ThreeBody::new(REFERENCE_G);
    let e0 = body.energy(&data.states()[0], &REFERENCE_MASSES);
    let p0 = body.momentum(&data.states()[0], &REFERENCE_MASSES);
    for z in data.states() {
        assert!((body.energy(z, &REFERENCE_MASSES) - e0).abs() <= 1e-6 * e0.abs());
        let p = body.momentum(z, &REFERENCE_MASSES);
        for k in 0..3 {
            assert!((p[k] - p0[k]).abs() < 1e-6);
        }
    }
}

#[test]
fn fixture_covers_two_years_with_a_train_split() {
    let data = ReferenceSystem::load_fixture().unwrap();
    assert_eq!(data.state_dim(), 18);
    assert_eq!(data.times()[0], 0.0);
    assert!((data.times().last().unwrap() - 2.0).abs() < 1e-12);
    let train = data.split(Split::Train);
    assert!(train.len() > 1 && train.len() < data.len());
    assert!(train.times().iter().all(|&t| t <= 1.0));
}

#[test]
fn library_constant_stays_astronomical() {
    assert!((GRAVITATIONAL_CONSTANT - 4.0 * std::f64::consts::PI.powi(2)).abs() < 1e-15);
    assert_eq!(ThreeBody::new(REFERENCE_G).g(), 1.0);
}

#[test]
fn loss_vanishes_at_the_true_masses() {
    let data = short_dataset();
    let solver = ReferenceSystem::generation_solver();
    let body = ThreeBody::new(REFERENCE_G);
    let at_truth = trajectory_mse(
        &body,
        &masses([1.0; 3]),
        &data,
        &solver,
        MseOptions::default(),
    )
    .unwrap();
    assert!(at_truth < 1e-10, "{at_truth}");
    let perturbed = trajectory_mse(
        &body,
        &masses([1.1, 1.0, 1.0]),
        &data,
        &solver,
        MseOptions::default(),
    )
    .unwrap();
    assert!(perturbed > at_truth && perturbed > 1e-8, "{perturbed}");
}

#[test]
fn every_method_agrees_on_the_trajectory_loss_gradient() {
    let data = short_dataset();
    let body = ThreeBody::new(REFERENCE_G);
    let theta = masses([1.2, 0.9, 1.05]);
    let grads: Vec<Vec<f64>> = Method::ALL
        .iter()
        .map(|&m| {
            let est = GradientEstimator::new(m, Solver::dopri5(1e-9));
            trajectory_mse_loss(&body, &theta, &data, &est, MseOptions::default())
                .unwrap()
                .1
                .d_loss_d_theta
                .to_vec()
        })
        .collect();
    for g in &grads[1..] {
        for (a, b) in g.iter().zip(&grads[0]) {
            assert!((a - b).abs() <= 1e-4 * b.abs().max(1e-8), "{a} vs {b}");
        }
    }
}

#[test]
fn gradient_descent_started_at_the_truth_stays_there() {
    // Adam rescales even round-off gradients to unit steps, so the fixed-point property is SGD's.
    let data = short_dataset();
    let opt = OptimizerConfig {
        kind: OptimizerKind::Sgd,
        epochs: 5,
        ..Default::default()
    };
    let est = GradientEstimator::new(Method::Aca, Solver::dopri5(1e-9));
    let report = fit(
        &ThreeBody::new(REFERENCE_G),
        &data,
        &masses([1.0; 3]),
        &opt,
        &est,
        Parameterization::Log,
        MseOptions::default(),
    )
    .unwrap();
    for (m, truth) in report.final_theta.iter().zip(REFERENCE_MASSES) {
        assert!((m - truth).abs() / truth < 1e-3, "{m}");
    }
}
