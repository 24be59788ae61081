//! Continuous adjoint: integrate state, costate and parameter cotangent backwards together.

use super::{
    check_seeds, finish, CostStats, GradientResult, TerminalLoss, TrajectoryGradient,
    TrajectoryLossFn,
};
use crate::dynamics::{DifferentiableDynamics, OdeSystem};
use crate::error::Result;
use crate::solvers::{CheckpointCache, Solver};
use crate::vector::{ParameterVector, StateVector};

/// The reverse-time system on `[z̄, λ, g]` (dimension `2d + q`):
/// `z̄' = f(z̄)`, `λ' = −(∂f/∂z̄)ᵀ λ`, `g' = (∂f/∂θ)ᵀ λ`.
///
/// Integrated from `T` down to `t0` with `λ(T) = −∂J/∂z(T)` and `g(T) = 0`, it yields
/// `g(t0) = dJ/dθ` and `λ(t0) = −dJ/dz0`.
pub struct AugmentedAdjoint<'a, D: ?Sized> {
    dynamics: &'a D,
}

impl<'a, D: DifferentiableDynamics + ?Sized> AugmentedAdjoint<'a, D> {
    pub fn new(dynamics: &'a D) -> Self {
        Self { dynamics }
    }
}

impl<D: DifferentiableDynamics + ?Sized> OdeSystem for AugmentedAdjoint<'_, D> {
    fn state_dim(&self) -> usize {
        2 * self.dynamics.state_dim() + self.dynamics.param_dim()
    }

    fn param_dim(&self) -> usize {
        self.dynamics.param_dim()
    }

    fn eval(&self, t: f64, y: &[f64], theta: &[f64], dy: &mut [f64]) -> Result<()> {
        let d = self.dynamics.state_dim();
        let (z, rest) = y.split_at(d);
        let lambda = &rest[..d];
        let (dz, rest_out) = dy.split_at_mut(d);
        let (dlambda, dg) = rest_out.split_at_mut(d);
        self.dynamics.eval(t, z, theta, dz)?;
        self.dynamics.vjp(t, z, theta, lambda, dlambda, dg)?;
        for v in dlambda.iter_mut() {
            *v = -*v;
        }
        Ok(())
    }
}

/// Adjoint gradient together with the reverse-pass checkpoints of the augmented state.
#[derive(Clone, Debug)]
pub struct AdjointTrace {
    pub result: GradientResult,
    /// One cache per segment, in reverse order of integration (last segment first).
    pub reverse_caches: Vec<CheckpointCache>,
}

/// Adjoint gradient of a terminal loss that also keeps the reverse trajectory of `[z̄, λ, g]`.
#[allow(clippy::too_many_arguments)]
pub fn adjoint_with_trace<D: DifferentiableDynamics + ?Sized>(
    dynamics: &D,
    z0: &StateVector,
    theta: &ParameterVector,
    t0: f64,
    t_end: f64,
    forward: &Solver,
    reverse: &Solver,
    loss: &TerminalLoss,
) -> Result<AdjointTrace> {
    crate::dynamics::check_dims(dynamics, z0, theta)?;
    let n = z0.dim();
    let mut f = |states: &[Vec<f64>]| {
        let (value, seed) = super::terminal_loss_grad(loss, &states[1])?;
        Ok((value, vec![vec![0.0; n], seed.into_inner()]))
    };
    let (grad, reverse_caches) = trajectory(
        forward,
        reverse,
        dynamics,
        z0,
        theta,
        &[t0, t_end],
        &mut f,
        true,
    )?;
    Ok(AdjointTrace {
        result: grad.result,
        reverse_caches,
    })
}

#[allow(clippy::too_many_arguments)]
pub(super) fn trajectory<D: DifferentiableDynamics + ?Sized>(
    forward: &Solver,
    reverse: &Solver,
    dynamics: &D,
    z0: &[f64],
    theta: &[f64],
    times: &[f64],
    loss: &mut TrajectoryLossFn<'_>,
    keep_trace: bool,
) -> Result<(TrajectoryGradient, Vec<CheckpointCache>)> {
    let d = z0.len();
    let q = theta.len();
    let mut stats = CostStats::default();
    let mut states = vec![z0.to_vec()];
    for w in times.windows(2) {
        let start = states.last().expect("initial state present");
        let run = forward.run(dynamics, start, theta, w[0], w[1], false)?;
        stats.forward_f_evals += run.f_evals;
        stats.forward_accepted += run.accepted;
        stats.forward_rejected += run.rejected;
        states.push(run.z_end);
    }

    let (value, seeds) = loss(&states)?;
    check_seeds(&seeds, times.len(), d)?;

    let augmented = AugmentedAdjoint::new(dynamics);
    let last = times.len() - 1;
    let mut lambda: Vec<f64> = seeds[last].iter().map(|s| -s).collect();
    let mut g = vec![0.0; q];
    let mut traces = Vec::new();
    for k in (0..last).rev() {
        let mut y0 = Vec::with_capacity(2 * d + q);
        y0.extend_from_slice(&states[k + 1]);
        y0.extend_from_slice(&lambda);
        y0.extend_from_slice(&g);
        let run = reverse.run(&augmented, &y0, theta, times[k + 1], times[k], keep_trace)?;
        stats.backward_f_evals += run.f_evals;
        stats.reverse_accepted += run.accepted;
        stats.reverse_rejected += run.rejected;
        lambda = run.z_end[d..2 * d]
            .iter()
            .zip(&seeds[k])
            .map(|(l, s)| l - s)
            .collect();
        g = run.z_end[2 * d..].to_vec();
        traces.extend(run.cache);
    }
    let d_z0 = lambda.iter().map(|l| -l).collect();
    Ok((finish(value, d_z0, g, stats, states)?, traces))
}
