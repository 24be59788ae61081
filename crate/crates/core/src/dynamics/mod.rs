//! Differentiable right-hand sides `f(z, t, θ)` and the concrete systems used by the experiments.
//!
//! Every system exposes plain evaluation plus a vector-Jacobian product
//! `v ↦ (vᵀ ∂f/∂z, vᵀ ∂f/∂θ)`. The gradient estimators are built from these two primitives only,
//! so no dynamics carries mutable state and all of them can be shared across threads.

mod constant;
mod counting;
mod fc;
mod features;
mod linear;
mod three_body;
mod van_der_pol;

pub use constant::Constant;
pub use counting::Counting;
pub use fc::{fc_dynamics, FcDynamics, DEFAULT_HIDDEN};
pub use features::{augmented_features, augmented_features_vjp, FEATURE_DIM};
pub use linear::{linear_dynamics, Linear};
pub use three_body::{
    three_body_dynamics, ThreeBody, DEFAULT_MIN_DISTANCE, GRAVITATIONAL_CONSTANT,
};
pub use van_der_pol::{van_der_pol_dynamics, VanDerPol, DEFAULT_MU};

use crate::error::{Error, Result};
use crate::vector::{ParameterVector, StateVector};

/// A vector field that can be integrated. Buffers are caller-owned and overwritten.
pub trait OdeSystem: Send + Sync {
    fn state_dim(&self) -> usize;

    fn param_dim(&self) -> usize;

    /// Writes `dz/dt = f(t, z, θ)` into `dz`.
    fn eval(&self, t: f64, z: &[f64], theta: &[f64], dz: &mut [f64]) -> Result<()>;
}

/// An [`OdeSystem`] that also supplies vector-Jacobian products.
///
/// `vjp` must be linear in `v`. Time enters only through `eval`; none of the gradient estimators
/// differentiate through the time argument.
pub trait DifferentiableDynamics: OdeSystem {
    /// Writes `vᵀ ∂f/∂z` into `vjp_z` and `vᵀ ∂f/∂θ` into `vjp_theta`.
    fn vjp(
        &self,
        t: f64,
        z: &[f64],
        theta: &[f64],
        v: &[f64],
        vjp_z: &mut [f64],
        vjp_theta: &mut [f64],
    ) -> Result<()>;
}

pub(crate) fn check_dims<S: OdeSystem + ?Sized>(sys: &S, z: &[f64], theta: &[f64]) -> Result<()> {
    if z.len() != sys.state_dim() {
        return Err(Error::DimensionMismatch {
            what: "state",
            expected: sys.state_dim(),
            found: z.len(),
        });
    }
    if theta.len() != sys.param_dim() {
        return Err(Error::DimensionMismatch {
            what: "parameters",
            expected: sys.param_dim(),
            found: theta.len(),
        });
    }
    Ok(())
}

/// Evaluates `f` with dimension checks, returning an owned vector.
pub fn evaluate<S: OdeSystem + ?Sized>(
    sys: &S,
    t: f64,
    z: &StateVector,
    theta: &ParameterVector,
) -> Result<StateVector> {
    check_dims(sys, z, theta)?;
    let mut dz = vec![0.0; sys.state_dim()];
    sys.eval(t, z, theta, &mut dz)?;
    StateVector::new(dz).map_err(|_| Error::NonFiniteState { t })
}

/// Vector-Jacobian product with dimension checks, returning owned vectors.
pub fn vector_jacobian<D: DifferentiableDynamics + ?Sized>(
    dynamics: &D,
    t: f64,
    z: &StateVector,
    theta: &ParameterVector,
    v: &StateVector,
) -> Result<(StateVector, ParameterVector)> {
    check_dims(dynamics, z, theta)?;
    if v.dim() != dynamics.state_dim() {
        return Err(Error::DimensionMismatch {
            what: "cotangent",
            expected: dynamics.state_dim(),
            found: v.dim(),
        });
    }
    let mut vz = vec![0.0; dynamics.state_dim()];
    let mut vt = vec![0.0; dynamics.param_dim()];
    dynamics.vjp(t, z, theta, v, &mut vz, &mut vt)?;
    Ok((
        StateVector::new(vz).map_err(|_| Error::NonFiniteState { t })?,
        ParameterVector::new(vt).map_err(|_| Error::NonFiniteState { t })?,
    ))
}

#[cfg(test)]
pub(crate) mod testing {
    //! Finite-difference checks shared by the dynamics unit tests.

    use super::DifferentiableDynamics;

    /// Largest relative deviation between `vjp` and central differences of `eval`.
    pub fn vjp_fd_error<D: DifferentiableDynamics>(
        dynamics: &D,
        t: f64,
        z: &[f64],
        theta: &[f64],
        v: &[f64],
        eps: f64,
    ) -> f64 {
        let n = dynamics.state_dim();
        let q = dynamics.param_dim();
        let mut vz = vec![0.0; n];
        let mut vt = vec![0.0; q];
        dynamics.vjp(t, z, theta, v, &mut vz, &mut vt).unwrap();

        let project = |z: &[f64], theta: &[f64]| {
            let mut out = vec![0.0; n];
            dynamics.eval(t, z, theta, &mut out).unwrap();
            out.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
        };
        let mut worst = 0.0f64;
        let mut compare = |analytic: f64, numeric: f64| {
            let scale = analytic.abs().max(numeric.abs()).max(1e-3);
            worst = worst.max((analytic - numeric).abs() / scale);
        };
        for i in 0..n {
            let mut zp = z.to_vec();
            let mut zm = z.to_vec();
            zp[i] += eps;
            zm[i] -= eps;
            compare(
                vz[i],
                (project(&zp, theta) - project(&zm, theta)) / (2.0 * eps),
            );
        }
        for i in 0..q {
            let mut tp = theta.to_vec();
            let mut tm = theta.to_vec();
            tp[i] += eps;
            tm[i] -= eps;
            compare(vt[i], (project(z, &tp) - project(z, &tm)) / (2.0 * eps));
        }
        worst
    }

    /// Largest relative deviation of `vjp(a v1 + b v2)` from `a vjp(v1) + b vjp(v2)`.
    pub fn vjp_linearity_error<D: DifferentiableDynamics>(
        dynamics: &D,
        z: &[f64],
        theta: &[f64],
        v1: &[f64],
        v2: &[f64],
        a: f64,
        b: f64,
    ) -> f64 {
        let n = dynamics.state_dim();
        let q = dynamics.param_dim();
        let run = |v: &[f64]| {
            let mut vz = vec![0.0; n];
            let mut vt = vec![0.0; q];
            dynamics.vjp(0.0, z, theta, v, &mut vz, &mut vt).unwrap();
            vz.extend(vt);
            vz
        };
        let mixed: Vec<f64> = v1.iter().zip(v2).map(|(x, y)| a * x + b * y).collect();
        let lhs = run(&mixed);
        let r1 = run(v1);
        let r2 = run(v2);
        let scale = r1
            .iter()
            .chain(&r2)
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(1.0)
            * (a.abs() + b.abs()).max(1.0);
        lhs.iter()
            .zip(r1.iter().zip(&r2))
            .map(|(l, (x, y))| (l - (a * x + b * y)).abs() / scale)
            .fold(0.0, f64::max)
    }
}
