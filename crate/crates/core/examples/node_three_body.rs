//! A neural ODE (MLP on hand-crafted pairwise features) fitted to the three-body trajectory.
//! The network knows nothing about gravity, so expect a much larger test error than the
//! mass fit reaches.

use aca_ode::dynamics::{fc_dynamics, DEFAULT_HIDDEN, FEATURE_DIM};
use aca_ode::error::Result;
use aca_ode::gradients::{GradientEstimator, Method};
use aca_ode::optimize::{fit, MseOptions, OptimizerConfig, Parameterization, ReferenceSystem};
use aca_ode::solvers::Solver;

fn main() -> Result<()> {
    let epochs = std::env::args()
        .nth(1)
        .map_or(Ok(30), |s| s.parse())
        .unwrap_or(30);
    let data = ReferenceSystem::load_fixture()?;
    let net = fc_dynamics(FEATURE_DIM, DEFAULT_HIDDEN)?;
    let theta0 = net.init_params(0);
    println!("{} parameters", theta0.len());

    let opt = OptimizerConfig {
        epochs,
        initial_lr: 0.01,
        ..Default::default()
    };
    let estimator = GradientEstimator::new(Method::Aca, Solver::dopri5(1e-5));
    let report = fit(
        &net,
        &data,
        &theta0,
        &opt,
        &estimator,
        Parameterization::Identity,
        MseOptions::default(),
    )?;
    println!(
        "train mse {:.3e} -> {:.3e}",
        report.loss_history[0], report.train_mse
    );
    println!("test mse  {:.3e}", report.test_mse);
    Ok(())
}
