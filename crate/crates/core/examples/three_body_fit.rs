//! Recovers the three masses from the reference trajectory, starting from twice their value.
//!
//! Usage: `cargo run --release --example three_body_fit -- [naive|adjoint|aca]`

use aca_ode::dynamics::ThreeBody;
use aca_ode::error::Result;
use aca_ode::gradients::{GradientEstimator, Method};
use aca_ode::optimize::{
    fit, MseOptions, OptimizerConfig, Parameterization, ReferenceSystem, REFERENCE_G,
    REFERENCE_MASSES,
};
use aca_ode::solvers::Solver;
use aca_ode::vector::ParameterVector;

fn main() -> Result<()> {
    let method: Method = std::env::args()
        .nth(1)
        .as_deref()
        .unwrap_or("aca")
        .parse()?;
    let data = ReferenceSystem::load_fixture()?;
    let start = ParameterVector::new(REFERENCE_MASSES.iter().map(|m| 2.0 * m).collect())?;
    let estimator = GradientEstimator::new(method, Solver::dopri5(1e-5));

    let report = fit(
        &ThreeBody::new(REFERENCE_G),
        &data,
        &start,
        &OptimizerConfig::default(),
        &estimator,
        Parameterization::Log,
        MseOptions::default(),
    )?;
    for (epoch, loss) in report.loss_history.iter().enumerate().step_by(10) {
        println!("epoch {epoch:>3}  train mse {loss:.4e}");
    }
    println!(
        "masses   {:?} (true {REFERENCE_MASSES:?})",
        report.final_theta.as_slice()
    );
    println!(
        "train mse {:.3e}, test mse {:.3e}",
        report.train_mse, report.test_mse
    );
    println!(
        "{} forward / {} backward dynamics evaluations",
        report.grad_stats.forward_f_evals, report.grad_stats.backward_f_evals
    );
    Ok(())
}
