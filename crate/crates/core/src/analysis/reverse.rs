use crate::dynamics::OdeSystem;
use crate::error::Result;
use crate::solvers::{ButcherTableau, CheckpointCache, Solver, SolverConfig};
use crate::vector::StateVector;

/// How well integrating `t0 → T → t0` returns to the initial value.
#[derive(Clone, Debug, PartialEq)]
pub struct ReverseErrorReport {
    pub forward_terminal: StateVector,
    pub reconstructed_initial: StateVector,
    /// `‖z0 − z̄(t0)‖₂`.
    pub abs_error: f64,
    pub forward_accepted: usize,
    pub reverse_accepted: usize,
}

/// One entry of a reconstruction-error series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReverseErrorPoint {
    /// Step size for fixed-step series, tolerance for adaptive ones.
    pub setting: f64,
    pub abs_error: f64,
}

/// Reconstruction of the forward trajectory from its checkpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplayReport {
    pub cache: CheckpointCache,
    /// `‖z0 − z̄(t0)‖₂` where `z̄(t0)` is read back from the checkpoints.
    pub abs_error: f64,
    /// Largest `‖ψ(z_i) − z_{i+1}‖₂` over all re-executed steps.
    pub max_step_mismatch: f64,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Integrates forward, then backwards from `z(T)` alone — the adjoint method's reconstruction of
/// the trajectory, without the costate.
pub fn reverse_reconstruction<S: OdeSystem + ?Sized>(
    dynamics: &S,
    z0: &[f64],
    theta: &[f64],
    t0: f64,
    t_end: f64,
    solver: &Solver,
) -> Result<ReverseErrorReport> {
    let forward = solver.run(dynamics, z0, theta, t0, t_end, false)?;
    let reverse = solver.run(dynamics, &forward.z_end, theta, t_end, t0, false)?;
    Ok(ReverseErrorReport {
        abs_error: distance(z0, &reverse.z_end),
        forward_terminal: StateVector::from_trusted(forward.z_end),
        reconstructed_initial: StateVector::from_trusted(reverse.z_end),
        forward_accepted: forward.accepted,
        reverse_accepted: reverse.accepted,
    })
}

/// Integrates forward keeping checkpoints, then walks them backwards, re-executing every step
/// from its stored start to confirm it lands on the next checkpoint.
pub fn checkpoint_replay<S: OdeSystem + ?Sized>(
    dynamics: &S,
    z0: &[f64],
    theta: &[f64],
    t0: f64,
    t_end: f64,
    solver: &Solver,
) -> Result<ReplayReport> {
    let forward = solver.run(dynamics, z0, theta, t0, t_end, true)?;
    let cache = forward.cache.expect("recording run keeps its cache");
    let mut mismatch = 0.0f64;
    for i in (0..cache.accepted_steps()).rev() {
        let step = solver.step(
            dynamics,
            cache.time_points()[i],
            &cache.z_values()[i],
            theta,
            cache.step_sizes()[i],
            None,
        )?;
        mismatch = mismatch.max(distance(&step.z_new, &cache.z_values()[i + 1]));
    }
    let abs_error = distance(z0, &cache.z_values()[0]);
    Ok(ReplayReport {
        cache,
        abs_error,
        max_step_mismatch: mismatch,
    })
}

/// Fixed-step round-trip error for each step size; the forward and reverse passes use the same
/// number of steps.
#[allow(clippy::too_many_arguments)]
pub fn reverse_error_vs_step<S: OdeSystem + ?Sized>(
    dynamics: &S,
    z0: &[f64],
    theta: &[f64],
    t0: f64,
    t_end: f64,
    tableau: &ButcherTableau,
    h_list: &[f64],
) -> Result<Vec<ReverseErrorPoint>> {
    let span = (t_end - t0).abs();
    h_list
        .iter()
        .map(|&h| {
            let steps = ((span / h).round() as usize).max(1);
            let solver = Solver::fixed(tableau.clone(), steps);
            let report = reverse_reconstruction(dynamics, z0, theta, t0, t_end, &solver)?;
            Ok(ReverseErrorPoint {
                setting: span / steps as f64,
                abs_error: report.abs_error,
            })
        })
        .collect()
}

/// Adaptive round-trip error for each tolerance (`rtol = atol = tol`).
#[allow(clippy::too_many_arguments)]
pub fn reverse_error_vs_tolerance<S: OdeSystem + ?Sized>(
    dynamics: &S,
    z0: &[f64],
    theta: &[f64],
    t0: f64,
    t_end: f64,
    tableau: &ButcherTableau,
    tol_list: &[f64],
) -> Result<Vec<ReverseErrorPoint>> {
    tol_list
        .iter()
        .map(|&tol| {
            let solver = Solver::new(tableau.clone(), SolverConfig::with_tolerances(tol, tol));
            let report = reverse_reconstruction(dynamics, z0, theta, t0, t_end, &solver)?;
            Ok(ReverseErrorPoint {
                setting: tol,
                abs_error: report.abs_error,
            })
        })
        .collect()
}
