//! dL/dz0 for `z' = kz`, `L = z(T)²` from each estimator, against `2 z0 e^{2kT}`.

use aca_ode::dynamics::linear_dynamics;
use aca_ode::error::Result;
use aca_ode::gradients::{gradient_dispatch, Method, TerminalLoss};
use aca_ode::solvers::Solver;
use aca_ode::vector::{ParameterVector, StateVector};

fn main() -> Result<()> {
    let (k, z0) = (1.0, 1.0);
    let solver = Solver::dopri5(1e-5);
    let dynamics = linear_dynamics(k);

    println!(
        "{:>4} {:>14} {:>11} {:>11} {:>11}",
        "T", "exact", "naive", "adjoint", "aca"
    );
    for t_end in 1..=10 {
        let t_end = t_end as f64;
        let exact = 2.0 * z0 * (2.0 * k * t_end).exp();
        let errors: Vec<String> = Method::ALL
            .iter()
            .map(|&m| {
                let z = StateVector::new(vec![z0])?;
                let g = gradient_dispatch(
                    m,
                    &dynamics,
                    &z,
                    &ParameterVector::new(vec![k])?,
                    0.0,
                    t_end,
                    &solver,
                    &TerminalLoss::SquaredState,
                )?;
                Ok(format!(
                    "{:11.3e}",
                    (g.d_loss_d_z0[0] - exact).abs() / exact
                ))
            })
            .collect::<Result<_>>()?;
        println!("{t_end:>4} {exact:>14.6e} {}", errors.join(" "));
    }
    println!("(relative errors, Dopri5 rtol = atol = 1e-5)");
    Ok(())
}
