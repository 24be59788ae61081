//! The adaptive integration loop and its checkpoint record.

use super::{initial_step_counted, propose_step, step_with, Solver, SolverConfig};
use crate::dynamics::{check_dims, OdeSystem};
use crate::error::{Error, Result};
use crate::vector::{ParameterVector, StateVector};

/// Accepted discretization points and states of one forward integration.
///
/// `time_points[0] = t0`, `time_points[N] = T` exactly, and `z_values[0]` is the initial state.
/// `step_sizes[i]` is the step that produced `z_values[i + 1]`; replaying
/// `step(time_points[i], z_values[i], step_sizes[i])` reproduces `z_values[i + 1]` bitwise.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointCache {
    time_points: Vec<f64>,
    z_values: Vec<Vec<f64>>,
    step_sizes: Vec<f64>,
    rejected_steps: usize,
    total_f_evals: usize,
}

impl CheckpointCache {
    pub fn time_points(&self) -> &[f64] {
        &self.time_points
    }

    pub fn z_values(&self) -> &[Vec<f64>] {
        &self.z_values
    }

    pub fn step_sizes(&self) -> &[f64] {
        &self.step_sizes
    }

    pub fn accepted_steps(&self) -> usize {
        self.step_sizes.len()
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected_steps
    }

    /// Dynamics evaluations, including the initial-step heuristic and rejected trials.
    pub fn total_f_evals(&self) -> usize {
        self.total_f_evals
    }
}

/// Outcome of an integration: the end state plus counters, and the checkpoints when recorded.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub z_end: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    pub f_evals: usize,
    pub cache: Option<CheckpointCache>,
}

/// The next trial step from `t` towards `t1` with proposed step `h`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Trial {
    pub h: f64,
    pub t_next: f64,
    pub last: bool,
}

/// Truncates the final step so the integration lands on `t1` exactly.
pub(crate) fn plan_trial(t: f64, h: f64, t1: f64) -> Trial {
    let dir = (t1 - t).signum();
    if (t + h - t1) * dir >= 0.0 {
        Trial {
            h: t1 - t,
            t_next: t1,
            last: true,
        }
    } else {
        Trial {
            h,
            t_next: t + h,
            last: false,
        }
    }
}

impl Solver {
    /// Integrates from `t0` to `t1` and returns `z(t1)` with the checkpoint cache.
    pub fn integrate<S: OdeSystem + ?Sized>(
        &self,
        sys: &S,
        z0: &StateVector,
        theta: &ParameterVector,
        t0: f64,
        t1: f64,
    ) -> Result<(StateVector, CheckpointCache)> {
        let run = self.run(sys, z0, theta, t0, t1, true)?;
        let cache = run.cache.expect("recording run keeps its cache");
        Ok((StateVector::from_trusted(run.z_end), cache))
    }

    /// Integration on raw slices. With `record = false` only the end state and counters are kept.
    pub fn run<S: OdeSystem + ?Sized>(
        &self,
        sys: &S,
        z0: &[f64],
        theta: &[f64],
        t0: f64,
        t1: f64,
        record: bool,
    ) -> Result<Trajectory> {
        self.config.validate()?;
        check_dims(sys, z0, theta)?;
        if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
            return Err(Error::InvalidConfig(format!(
                "integration interval [{t0}, {t1}] must be finite and non-empty"
            )));
        }
        if z0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput {
                what: "initial state",
            });
        }
        let mut rec = Recorder::new(record, t0, z0);
        if self.is_fixed_step() {
            self.run_fixed(sys, z0, theta, t0, t1, &mut rec)
        } else {
            self.run_adaptive(sys, z0, theta, t0, t1, &mut rec)
        }
    }

    pub(crate) fn fixed_step_count(&self, span: f64) -> Result<usize> {
        match (self.config.fixed_steps, self.config.h_init) {
            (Some(n), _) => Ok(n),
            (None, Some(h)) => Ok((span.abs() / h).ceil().max(1.0) as usize),
            (None, None) => Err(Error::InvalidConfig(format!(
                "tableau {} has no error estimator: set fixed_steps or h_init",
                self.tableau.name()
            ))),
        }
    }

    fn run_fixed<S: OdeSystem + ?Sized>(
        &self,
        sys: &S,
        z0: &[f64],
        theta: &[f64],
        t0: f64,
        t1: f64,
        rec: &mut Recorder,
    ) -> Result<Trajectory> {
        let n = self.fixed_step_count(t1 - t0)?;
        let h = (t1 - t0) / n as f64;
        let fsal = self.tableau.fsal();
        let mut t = t0;
        let mut z = z0.to_vec();
        let mut k1: Option<Vec<f64>> = None;
        let mut f_evals = 0;
        for i in 0..n {
            let out = step_with(
                &self.tableau,
                &self.config,
                sys,
                t,
                &z,
                theta,
                h,
                k1.as_deref(),
            )?;
            f_evals += out.f_evals;
            t = if i + 1 == n { t1 } else { t + h };
            z = out.z_new;
            if fsal {
                k1 = out.stages.into_iter().last();
            }
            rec.push(t, h, &z);
        }
        Ok(rec.finish(z, n, 0, f_evals))
    }

    fn run_adaptive<S: OdeSystem + ?Sized>(
        &self,
        sys: &S,
        z0: &[f64],
        theta: &[f64],
        t0: f64,
        t1: f64,
        rec: &mut Recorder,
    ) -> Result<Trajectory> {
        let cfg = SolverConfig {
            h_min: Some(self.config.h_min_for(t1 - t0)),
            ..self.config.clone()
        };
        let order = self.tableau.order_p();
        let fsal = self.tableau.fsal();
        let dir = (t1 - t0).signum();
        let (h_mag, mut f_evals) = initial_step_counted(sys, t0, z0, theta, t1, order, &cfg)?;
        let mut h = dir * h_mag;
        let mut t = t0;
        let mut z = z0.to_vec();
        let mut k1: Option<Vec<f64>> = None;
        let (mut accepted, mut rejected) = (0usize, 0usize);
        while t != t1 {
            if accepted >= cfg.max_steps {
                return Err(Error::MaxStepsExceeded {
                    t,
                    max_steps: cfg.max_steps,
                });
            }
            let mut rejects_here = 0;
            loop {
                let trial = super::plan_trial(t, h, t1);
                let out = step_with(
                    &self.tableau,
                    &cfg,
                    sys,
                    t,
                    &z,
                    theta,
                    trial.h,
                    k1.as_deref(),
                )?;
                f_evals += out.f_evals;
                if out.err_norm <= 1.0 {
                    accepted += 1;
                    if !trial.last {
                        h = propose_step(out.err_norm, trial.h, order, &cfg)
                            .map_err(|e| at_time(e, t))?;
                    }
                    t = trial.t_next;
                    z = out.z_new;
                    k1 = if fsal {
                        out.stages.into_iter().last()
                    } else {
                        None
                    };
                    rec.push(t, trial.h, &z);
                    break;
                }
                rejected += 1;
                rejects_here += 1;
                if rejects_here > cfg.max_rejects_per_step {
                    return Err(Error::MaxRejectsExceeded {
                        t,
                        max_rejects: cfg.max_rejects_per_step,
                    });
                }
                h = propose_step(out.err_norm, trial.h, order, &cfg).map_err(|e| at_time(e, t))?;
                if fsal {
                    k1 = out.stages.into_iter().next();
                }
            }
        }
        Ok(rec.finish(z, accepted, rejected, f_evals))
    }
}

pub(crate) fn at_time(e: Error, t: f64) -> Error {
    match e {
        Error::StepUnderflow { h, h_min, .. } => Error::StepUnderflow { t, h, h_min },
        other => other,
    }
}

struct Recorder {
    keep: bool,
    time_points: Vec<f64>,
    z_values: Vec<Vec<f64>>,
    step_sizes: Vec<f64>,
}

impl Recorder {
    fn new(keep: bool, t0: f64, z0: &[f64]) -> Self {
        let mut rec = Self {
            keep,
            time_points: Vec::new(),
            z_values: Vec::new(),
            step_sizes: Vec::new(),
        };
        if keep {
            rec.time_points.push(t0);
            rec.z_values.push(z0.to_vec());
        }
        rec
    }

    fn push(&mut self, t: f64, h: f64, z: &[f64]) {
        if self.keep {
            self.time_points.push(t);
            self.step_sizes.push(h);
            self.z_values.push(z.to_vec());
        }
    }

    fn finish(
        &mut self,
        z_end: Vec<f64>,
        accepted: usize,
        rejected: usize,
        f_evals: usize,
    ) -> Trajectory {
        let cache = self.keep.then(|| CheckpointCache {
            time_points: std::mem::take(&mut self.time_points),
            z_values: std::mem::take(&mut self.z_values),
            step_sizes: std::mem::take(&mut self.step_sizes),
            rejected_steps: rejected,
            total_f_evals: f_evals,
        });
        Trajectory {
            z_end,
            accepted,
            rejected,
            f_evals,
            cache,
        }
    }
}
