//! Van der Pol: solving backwards from z(T) does not return to z0, while replaying the
//! forward checkpoints does, bit for bit.

use aca_ode::analysis::{checkpoint_replay, reverse_reconstruction};
use aca_ode::dynamics::van_der_pol_dynamics;
use aca_ode::error::Result;
use aca_ode::solvers::{dormand_prince_45, Solver, SolverConfig};

fn main() -> Result<()> {
    let vdp = van_der_pol_dynamics(0.15);
    let y0 = [2.0, 0.0];
    let t_end = 25.0;
    let solver = Solver::new(dormand_prince_45(), Default::default());

    let rev = reverse_reconstruction(&vdp, &y0, &[], 0.0, t_end, &solver)?;
    println!(
        "z(T)                = {:?}",
        rev.forward_terminal.as_slice()
    );
    println!(
        "reverse solve z(0)  = {:?}",
        rev.reconstructed_initial.as_slice()
    );
    println!("reverse error       = {:.3e}", rev.abs_error);

    let replay = checkpoint_replay(&vdp, &y0, &[], 0.0, t_end, &solver)?;
    println!(
        "checkpoint replay   = error {:e}, step mismatch {:e}, {} checkpoints",
        replay.abs_error,
        replay.max_step_mismatch,
        replay.cache.accepted_steps()
    );

    // Backwards in time the limit cycle repels, so loose tolerances can blow up outright.
    println!("\nround-trip error vs tolerance");
    for tol in [1e-3, 1e-4, 1e-5, 1e-7, 1e-9] {
        let solver = Solver::new(dormand_prince_45(), SolverConfig::with_tolerances(tol, tol));
        match reverse_reconstruction(&vdp, &y0, &[], 0.0, t_end, &solver) {
            Ok(r) => println!("  tol {tol:8.0e}  error {:.3e}", r.abs_error),
            Err(e) => println!("  tol {tol:8.0e}  reverse solve failed: {e}"),
        }
    }
    Ok(())
}
