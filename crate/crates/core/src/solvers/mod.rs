//! Explicit Runge–Kutta steppers and the adaptive integration loop.

mod config;
mod integrate;
mod step;
mod tableau;

pub use config::SolverConfig;
pub use integrate::{CheckpointCache, Trajectory};
pub use step::{error_norm, initial_step, propose_step, StepOutcome};
pub use tableau::{
    bogacki_shampine_23, dormand_prince_45, euler, heun_euler_12, rk2_heun, rk4, ButcherTableau,
};

pub(crate) use integrate::plan_trial;
pub(crate) use step::{
    combine, controller_factor, ensure_finite, error_norm_vjp, error_vector, initial_step_counted,
    stage_time, step_with,
};

/// A tableau paired with its step-size control settings.
#[derive(Clone, Debug, PartialEq)]
pub struct Solver {
    pub tableau: ButcherTableau,
    pub config: SolverConfig,
}

impl Solver {
    pub fn new(tableau: ButcherTableau, config: SolverConfig) -> Self {
        Self { tableau, config }
    }

    /// Dormand–Prince 5(4) with `rtol = atol = tol`.
    pub fn dopri5(tol: f64) -> Self {
        Self::new(dormand_prince_45(), SolverConfig::with_tolerances(tol, tol))
    }

    /// A fixed-step solver taking `steps` equal steps over the interval.
    pub fn fixed(tableau: ButcherTableau, steps: usize) -> Self {
        Self::new(tableau, SolverConfig::fixed(steps))
    }

    /// True when every step is accepted with a constant step size.
    pub fn is_fixed_step(&self) -> bool {
        self.config.fixed_steps.is_some() || !self.tableau.is_adaptive()
    }
}
