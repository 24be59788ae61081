//! The three gradient estimators for ODE-defined losses.
//!
//! All three share the forward integration. They differ in what they keep and how they walk back:
//!
//! * [`Method::Naive`] records every solver operation on a tape, including rejected trial steps and
//!   the step-size controller, and backpropagates through all of it.
//! * [`Method::Adjoint`] keeps only `z(T)` and integrates the costate `λ` backwards together with a
//!   reverse-time reconstruction `z̄` of the state.
//! * [`Method::Aca`] keeps the accepted checkpoints `(t_i, z_i)` and, going backwards, re-executes
//!   one step per interval to take its local vector-Jacobian product.
//!
//! Internally the costate follows the convention `λ(T) = −∂J/∂z(T)` with
//! `dJ/dθ ← dJ/dθ − λᵀ ∂ψ/∂θ`. Every returned gradient is the true gradient of `J`, which the test
//! suite checks against central finite differences.

mod aca;
mod adjoint;
mod loss;
mod naive;
mod tape;

use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

pub use adjoint::{adjoint_with_trace, AdjointTrace, AugmentedAdjoint};
pub use loss::{terminal_loss_grad, TerminalLoss};

use crate::dynamics::{check_dims, DifferentiableDynamics};
use crate::error::{Error, Result};
use crate::solvers::Solver;
use crate::vector::{ParameterVector, StateVector};

/// Work and memory counters of one gradient computation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CostStats {
    pub forward_f_evals: usize,
    pub backward_f_evals: usize,
    pub forward_accepted: usize,
    pub forward_rejected: usize,
    /// Reverse-time steps of the adjoint's augmented solve.
    pub reverse_accepted: usize,
    pub reverse_rejected: usize,
    /// Naive: nodes on the solver tape. ACA: nodes of the largest local step graph.
    pub peak_tape_nodes: usize,
}

impl AddAssign for CostStats {
    fn add_assign(&mut self, o: Self) {
        self.forward_f_evals += o.forward_f_evals;
        self.backward_f_evals += o.backward_f_evals;
        self.forward_accepted += o.forward_accepted;
        self.forward_rejected += o.forward_rejected;
        self.reverse_accepted += o.reverse_accepted;
        self.reverse_rejected += o.reverse_rejected;
        self.peak_tape_nodes = self.peak_tape_nodes.max(o.peak_tape_nodes);
    }
}

/// Gradient of a loss with respect to the parameters and the initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientResult {
    pub d_loss_d_theta: ParameterVector,
    pub d_loss_d_z0: StateVector,
    pub loss: f64,
    pub stats: CostStats,
}

/// Gradient of a loss over states sampled at several times, plus those states.
#[derive(Clone, Debug)]
pub struct TrajectoryGradient {
    pub result: GradientResult,
    /// `z(t_k)` for every requested time, starting with `z0`.
    pub states: Vec<StateVector>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Naive,
    Adjoint,
    Aca,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Naive, Method::Adjoint, Method::Aca];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Adjoint => "adjoint",
            Method::Aca => "aca",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "naive" => Ok(Method::Naive),
            "adjoint" => Ok(Method::Adjoint),
            "aca" => Ok(Method::Aca),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

/// Settings beyond the forward solver.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientOptions {
    /// Solver for the adjoint's reverse pass; `None` reuses the forward solver.
    pub reverse_solver: Option<Solver>,
    /// Maximum number of naive-method tape nodes before failing with `TapeOverflow`.
    pub tape_budget: usize,
}

impl Default for GradientOptions {
    fn default() -> Self {
        Self {
            reverse_solver: None,
            tape_budget: 20_000_000,
        }
    }
}

/// Loss over the states at the requested times: returns `J` and one seed `∂J/∂z(t_k)` per time.
pub type TrajectoryLossFn<'a> = dyn FnMut(&[Vec<f64>]) -> Result<(f64, Vec<Vec<f64>>)> + 'a;

/// A gradient method bound to a forward solver.
#[derive(Clone, Debug)]
pub struct GradientEstimator {
    pub method: Method,
    pub solver: Solver,
    pub options: GradientOptions,
}

impl GradientEstimator {
    pub fn new(method: Method, solver: Solver) -> Self {
        Self {
            method,
            solver,
            options: GradientOptions::default(),
        }
    }

    pub fn with_options(mut self, options: GradientOptions) -> Self {
        self.options = options;
        self
    }

    /// Gradient of a terminal loss `J(z(T))`.
    pub fn terminal<D: DifferentiableDynamics + ?Sized>(
        &self,
        dynamics: &D,
        z0: &StateVector,
        theta: &ParameterVector,
        t0: f64,
        t_end: f64,
        loss: &TerminalLoss,
    ) -> Result<GradientResult> {
        let n = z0.dim();
        let mut f = |states: &[Vec<f64>]| {
            let (value, seed) = terminal_loss_grad(loss, &states[1])?;
            Ok((value, vec![vec![0.0; n], seed.into_inner()]))
        };
        self.trajectory(dynamics, z0, theta, &[t0, t_end], &mut f)
            .map(|g| g.result)
    }

    /// Gradient of a loss on `z(t_0), …, z(t_K)`; `times` must be strictly monotone.
    pub fn trajectory<D: DifferentiableDynamics + ?Sized>(
        &self,
        dynamics: &D,
        z0: &StateVector,
        theta: &ParameterVector,
        times: &[f64],
        loss: &mut TrajectoryLossFn<'_>,
    ) -> Result<TrajectoryGradient> {
        check_dims(dynamics, z0, theta)?;
        validate_times(times)?;
        if times.len() == 1 {
            let states = vec![z0.to_vec()];
            let (value, seeds) = loss(&states)?;
            return finish(
                value,
                seeds[0].clone(),
                vec![0.0; theta.dim()],
                CostStats::default(),
                states,
            );
        }
        match self.method {
            Method::Aca => aca::trajectory(&self.solver, dynamics, z0, theta, times, loss),
            Method::Adjoint => {
                let reverse = self.options.reverse_solver.as_ref().unwrap_or(&self.solver);
                adjoint::trajectory(
                    &self.solver,
                    reverse,
                    dynamics,
                    z0,
                    theta,
                    times,
                    loss,
                    false,
                )
                .map(|(g, _)| g)
            }
            Method::Naive => naive::trajectory(
                &self.solver,
                self.options.tape_budget,
                dynamics,
                z0,
                theta,
                times,
                loss,
            ),
        }
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidConfig(
            "need at least one finite time point".into(),
        ));
    }
    if times.len() > 1 {
        let dir = (times[1] - times[0]).signum();
        if dir == 0.0 || times.windows(2).any(|w| (w[1] - w[0]) * dir <= 0.0) {
            return Err(Error::InvalidConfig(
                "time points must be strictly monotone".into(),
            ));
        }
    }
    Ok(())
}

pub(crate) fn finish(
    loss: f64,
    d_z0: Vec<f64>,
    d_theta: Vec<f64>,
    stats: CostStats,
    states: Vec<Vec<f64>>,
) -> Result<TrajectoryGradient> {
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss);
    }
    Ok(TrajectoryGradient {
        result: GradientResult {
            d_loss_d_theta: ParameterVector::new(d_theta).map_err(|_| Error::NonFiniteLoss)?,
            d_loss_d_z0: StateVector::new(d_z0).map_err(|_| Error::NonFiniteLoss)?,
            loss,
            stats,
        },
        states: states.into_iter().map(StateVector::from_trusted).collect(),
    })
}

fn check_seeds(seeds: &[Vec<f64>], count: usize, dim: usize) -> Result<()> {
    if seeds.len() != count || seeds.iter().any(|s| s.len() != dim) {
        return Err(Error::DimensionMismatch {
            what: "loss seeds",
            expected: count * dim,
            found: seeds.iter().map(Vec::len).sum(),
        });
    }
    Ok(())
}

/// ACA gradient of a terminal loss.
pub fn grad_aca<D: DifferentiableDynamics + ?Sized>(
    dynamics: &D,
    z0: &StateVector,
    theta: &ParameterVector,
    t0: f64,
    t_end: f64,
    solver: &Solver,
    loss: &TerminalLoss,
) -> Result<GradientResult> {
    gradient_dispatch(Method::Aca, dynamics, z0, theta, t0, t_end, solver, loss)
}

/// Continuous-adjoint gradient of a terminal loss, reverse pass on the forward solver.
pub fn grad_adjoint<D: DifferentiableDynamics + ?Sized>(
    dynamics: &D,
    z0: &StateVector,
    theta: &ParameterVector,
    t0: f64,
    t_end: f64,
    solver: &Solver,
    loss: &TerminalLoss,
) -> Result<GradientResult> {
    gradient_dispatch(
        Method::Adjoint,
        dynamics,
        z0,
        theta,
        t0,
        t_end,
        solver,
        loss,
    )
}

/// Naive backpropagation through the whole solver, step-size search included.
pub fn grad_naive<D: DifferentiableDynamics + ?Sized>(
    dynamics: &D,
    z0: &StateVector,
    theta: &ParameterVector,
    t0: f64,
    t_end: f64,
    solver: &Solver,
    loss: &TerminalLoss,
) -> Result<GradientResult> {
    gradient_dispatch(Method::Naive, dynamics, z0, theta, t0, t_end, solver, loss)
}

/// Uniform entry point over the three methods.
#[allow(clippy::too_many_arguments)]
pub fn gradient_dispatch<D: DifferentiableDynamics + ?Sized>(
    method: Method,
    dynamics: &D,
    z0: &StateVector,
    theta: &ParameterVector,
    t0: f64,
    t_end: f64,
    solver: &Solver,
    loss: &TerminalLoss,
) -> Result<GradientResult> {
    GradientEstimator::new(method, solver.clone()).terminal(dynamics, z0, theta, t0, t_end, loss)
}
