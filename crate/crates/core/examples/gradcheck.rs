//! Checks every estimator against central finite differences on the three-body problem,
//! with respect to the masses.

use aca_ode::analysis::{fd_gradient, relative_error, FdOracleConfig};
use aca_ode::dynamics::ThreeBody;
use aca_ode::error::Result;
use aca_ode::gradients::{gradient_dispatch, terminal_loss_grad, Method, TerminalLoss};
use aca_ode::optimize::{ReferenceSystem, REFERENCE_G};
use aca_ode::solvers::Solver;
use aca_ode::vector::{ParameterVector, StateVector};

fn main() -> Result<()> {
    let system = ReferenceSystem::canonical();
    let body = ThreeBody::new(REFERENCE_G);
    let t_end = 0.3;
    let solver = Solver::dopri5(1e-8);
    let target = solver
        .integrate(&body, &system.initial_state, &system.masses, 0.0, t_end)?
        .0;
    let loss = TerminalLoss::MseToTarget(target);
    let guess = ParameterVector::new(vec![1.1, 1.8, 3.2])?;

    let oracle = fd_gradient(
        |m| {
            let run = solver.run(&body, &system.initial_state, m, 0.0, t_end, false)?;
            Ok(terminal_loss_grad(&loss, &StateVector::new(run.z_end)?)?.0)
        },
        &guess,
        &FdOracleConfig::default(),
    )?;
    println!("finite differences  {:?}", oracle.as_slice());
    for m in Method::ALL {
        let g = gradient_dispatch(
            m,
            &body,
            &system.initial_state,
            &guess,
            0.0,
            t_end,
            &solver,
            &loss,
        )?;
        println!(
            "{m:>8}  rel. error {:.2e}  {:?}",
            relative_error(&g.d_loss_d_theta, &oracle),
            g.d_loss_d_theta.as_slice()
        );
    }
    Ok(())
}
