//! Direct backpropagation through every solver operation.
//!
//! Rejected trials, error norms, the step-size controller and the time bookkeeping all go on the
//! tape, so the step sizes are differentiated as functions of the state and parameters. The
//! initial step size is a constant leaf.

use super::tape::{NodeId, Tape};
use super::{check_seeds, finish, CostStats, TrajectoryGradient, TrajectoryLossFn};
use crate::dynamics::DifferentiableDynamics;
use crate::error::{Error, Result};
use crate::solvers::{initial_step_counted, plan_trial, Solver, SolverConfig};

pub(super) fn trajectory<D: DifferentiableDynamics + ?Sized>(
    solver: &Solver,
    budget: usize,
    dynamics: &D,
    z0: &[f64],
    theta: &[f64],
    times: &[f64],
    loss: &mut TrajectoryLossFn<'_>,
) -> Result<TrajectoryGradient> {
    solver.config.validate()?;
    let cfg = &solver.config;
    let mut tape = Tape::new(&solver.tableau, cfg, budget);
    let mut stats = CostStats::default();
    let z0_id = tape.input(z0.to_vec())?;
    let mut ids = vec![z0_id];
    for w in times.windows(2) {
        let start = *ids.last().expect("initial node present");
        let end = if solver.is_fixed_step() {
            record_fixed(
                &mut tape, solver, dynamics, start, theta, w[0], w[1], &mut stats,
            )?
        } else {
            record_adaptive(
                &mut tape, solver, dynamics, start, theta, w[0], w[1], &mut stats,
            )?
        };
        ids.push(end);
    }

    let states: Vec<Vec<f64>> = ids.iter().map(|&id| tape.value(id).to_vec()).collect();
    let (value, seeds) = loss(&states)?;
    check_seeds(&seeds, times.len(), z0.len())?;
    let seed_refs: Vec<(NodeId, &[f64])> = ids
        .iter()
        .copied()
        .zip(seeds.iter().map(Vec::as_slice))
        .collect();
    let back = tape.backward(dynamics, theta, &seed_refs)?;
    stats.backward_f_evals += back.vjps;
    stats.peak_tape_nodes = tape.len();
    let d_z0 = back.input_adjoint(z0_id, z0.len());
    finish(value, d_z0, back.theta_grad, stats, states)
}

#[allow(clippy::too_many_arguments)]
fn record_fixed<D: DifferentiableDynamics + ?Sized>(
    tape: &mut Tape<'_>,
    solver: &Solver,
    dynamics: &D,
    mut z: NodeId,
    theta: &[f64],
    t0: f64,
    t1: f64,
    stats: &mut CostStats,
) -> Result<NodeId> {
    let n = solver.fixed_step_count(t1 - t0)?;
    let h = (t1 - t0) / n as f64;
    let h_id = tape.scalar_input(h)?;
    let fsal = solver.tableau.fsal();
    let mut t = t0;
    let mut k1 = None;
    for i in 0..n {
        let nodes = tape.record_step(dynamics, t, z, h_id, theta, k1, false)?;
        stats.forward_f_evals += nodes.f_evals;
        stats.forward_accepted += 1;
        t = if i + 1 == n { t1 } else { t + h };
        z = nodes.z_new;
        k1 = if fsal {
            nodes.stages.last().copied()
        } else {
            None
        };
    }
    Ok(z)
}

fn check_underflow(h: f64, cfg: &SolverConfig, t: f64) -> Result<()> {
    let h_min = cfg.h_min.unwrap_or(0.0);
    if !(h.abs() >= h_min) || h == 0.0 {
        return Err(Error::StepUnderflow { t, h, h_min });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn record_adaptive<D: DifferentiableDynamics + ?Sized>(
    tape: &mut Tape<'_>,
    solver: &Solver,
    dynamics: &D,
    mut z: NodeId,
    theta: &[f64],
    t0: f64,
    t1: f64,
    stats: &mut CostStats,
) -> Result<NodeId> {
    let cfg = SolverConfig {
        h_min: Some(solver.config.h_min_for(t1 - t0)),
        ..solver.config.clone()
    };
    let fsal = solver.tableau.fsal();
    let dir = (t1 - t0).signum();
    let (h_mag, evals) = initial_step_counted(
        dynamics,
        t0,
        tape.value(z),
        theta,
        t1,
        solver.tableau.order_p(),
        &cfg,
    )?;
    stats.forward_f_evals += evals;
    let mut h_id = tape.scalar_input(dir * h_mag)?;
    let mut t_id = tape.scalar_input(t0)?;
    let t1_id = tape.scalar_input(t1)?;
    let mut k1: Option<NodeId> = None;
    let mut accepted = 0;
    while tape.scalar(t_id) != t1 {
        let t = tape.scalar(t_id);
        if accepted >= cfg.max_steps {
            return Err(Error::MaxStepsExceeded {
                t,
                max_steps: cfg.max_steps,
            });
        }
        let mut rejects_here = 0;
        loop {
            let trial = plan_trial(t, tape.scalar(h_id), t1);
            let (h_try, t_next) = if trial.last {
                (tape.sub(t1_id, t_id)?, t1_id)
            } else {
                (h_id, tape.add(t_id, h_id)?)
            };
            let nodes = tape.record_step(dynamics, t, z, h_try, theta, k1, true)?;
            stats.forward_f_evals += nodes.f_evals;
            let err_id = nodes
                .err_norm
                .expect("adaptive tableau estimates its error");
            if tape.scalar(err_id) <= 1.0 {
                accepted += 1;
                stats.forward_accepted += 1;
                if !trial.last {
                    h_id = tape.controller(err_id, h_try)?;
                    check_underflow(tape.scalar(h_id), &cfg, t)?;
                }
                t_id = t_next;
                z = nodes.z_new;
                k1 = if fsal {
                    nodes.stages.last().copied()
                } else {
                    None
                };
                break;
            }
            stats.forward_rejected += 1;
            rejects_here += 1;
            if rejects_here > cfg.max_rejects_per_step {
                return Err(Error::MaxRejectsExceeded {
                    t,
                    max_rejects: cfg.max_rejects_per_step,
                });
            }
            h_id = tape.controller(err_id, h_try)?;
            check_underflow(tape.scalar(h_id), &cfg, t)?;
            if fsal {
                k1 = Some(nodes.stages[0]);
            }
        }
    }
    Ok(z)
}
