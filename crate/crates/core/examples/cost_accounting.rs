//! Work and memory of each estimator on an adaptive van der Pol solve.

use aca_ode::dynamics::van_der_pol_dynamics;
use aca_ode::error::Result;
use aca_ode::gradients::{gradient_dispatch, Method, TerminalLoss};
use aca_ode::solvers::Solver;
use aca_ode::vector::{ParameterVector, StateVector};

fn main() -> Result<()> {
    let vdp = van_der_pol_dynamics(0.15);
    let z0 = StateVector::new(vec![2.0, 0.0])?;
    let none = ParameterVector::new(vec![])?;

    println!(
        "{:>6} {:>8} {:>6} {:>8} {:>9} {:>9} {:>8} {:>10}",
        "T", "method", "acc", "rej", "fwd evals", "bwd evals", "rev acc", "tape nodes"
    );
    for t_end in [5.0, 20.0, 80.0] {
        for m in Method::ALL {
            let s = gradient_dispatch(
                m,
                &vdp,
                &z0,
                &none,
                0.0,
                t_end,
                &Solver::dopri5(1e-6),
                &TerminalLoss::SquaredState,
            )?
            .stats;
            println!(
                "{t_end:>6} {m:>8} {:>6} {:>8} {:>9} {:>9} {:>8} {:>10}",
                s.forward_accepted,
                s.forward_rejected,
                s.forward_f_evals,
                s.backward_f_evals,
                s.reverse_accepted,
                s.peak_tape_nodes
            );
        }
    }
    Ok(())
}
