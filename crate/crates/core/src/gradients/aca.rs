//! Adaptive checkpoint adjoint: replay one accepted step at a time from the forward checkpoints.

use super::tape::Tape;
use super::{check_seeds, finish, CostStats, TrajectoryGradient, TrajectoryLossFn};
use crate::dynamics::DifferentiableDynamics;
use crate::error::{Error, Result};
use crate::solvers::{CheckpointCache, Solver};

pub(super) fn trajectory<D: DifferentiableDynamics + ?Sized>(
    solver: &Solver,
    dynamics: &D,
    z0: &[f64],
    theta: &[f64],
    times: &[f64],
    loss: &mut TrajectoryLossFn<'_>,
) -> Result<TrajectoryGradient> {
    let dim = z0.len();
    let mut stats = CostStats::default();
    let mut states = vec![z0.to_vec()];
    let mut caches = Vec::with_capacity(times.len() - 1);
    for w in times.windows(2) {
        let start = states.last().expect("initial state present");
        let run = solver.run(dynamics, start, theta, w[0], w[1], true)?;
        stats.forward_f_evals += run.f_evals;
        stats.forward_accepted += run.accepted;
        stats.forward_rejected += run.rejected;
        states.push(run.z_end);
        caches.push(run.cache.expect("recording run keeps its cache"));
    }

    let (value, seeds) = loss(&states)?;
    check_seeds(&seeds, times.len(), dim)?;

    let last = times.len() - 1;
    let mut lambda: Vec<f64> = seeds[last].iter().map(|s| -s).collect();
    let mut d_theta = vec![0.0; theta.len()];
    for k in (0..last).rev() {
        lambda = backward_segment(
            solver,
            dynamics,
            theta,
            &caches[k],
            lambda,
            &mut d_theta,
            &mut stats,
        )?;
        for (l, s) in lambda.iter_mut().zip(&seeds[k]) {
            *l -= s;
        }
    }
    let d_z0 = lambda.iter().map(|l| -l).collect();
    finish(value, d_z0, d_theta, stats, states)
}

/// Walks one segment's checkpoints backwards, returning the costate at the segment start.
fn backward_segment<D: DifferentiableDynamics + ?Sized>(
    solver: &Solver,
    dynamics: &D,
    theta: &[f64],
    cache: &CheckpointCache,
    mut lambda: Vec<f64>,
    d_theta: &mut [f64],
    stats: &mut CostStats,
) -> Result<Vec<f64>> {
    let dim = lambda.len();
    for i in (0..cache.accepted_steps()).rev() {
        let mut tape = Tape::new(&solver.tableau, &solver.config, usize::MAX);
        let z = tape.input(cache.z_values()[i].clone())?;
        let h = tape.scalar_input(cache.step_sizes()[i])?;
        let nodes = tape.record_step(dynamics, cache.time_points()[i], z, h, theta, None, false)?;
        stats.backward_f_evals += nodes.f_evals;
        let replay = tape.value(nodes.z_new);
        let expected = &cache.z_values()[i + 1];
        if replay
            .iter()
            .zip(expected)
            .any(|(a, b)| a.to_bits() != b.to_bits())
        {
            return Err(Error::CacheMismatch { index: i + 1 });
        }
        let back = tape.backward(dynamics, theta, &[(nodes.z_new, &lambda)])?;
        for (acc, g) in d_theta.iter_mut().zip(&back.theta_grad) {
            *acc -= g;
        }
        lambda = back.input_adjoint(z, dim);
        stats.peak_tape_nodes = stats.peak_tape_nodes.max(tape.len());
    }
    Ok(lambda)
}
