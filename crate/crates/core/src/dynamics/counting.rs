use std::sync::atomic::{AtomicUsize, Ordering};

use super::{DifferentiableDynamics, OdeSystem};
use crate::error::Result;

/// Wraps a dynamics and counts `eval` and `vjp` calls.
#[derive(Debug)]
pub struct Counting<D> {
    inner: D,
    evals: AtomicUsize,
    vjps: AtomicUsize,
}

impl<D> Counting<D> {
    pub fn new(inner: D) -> Self {
        Self {
            inner,
            evals: AtomicUsize::new(0),
            vjps: AtomicUsize::new(0),
        }
    }

    pub fn evals(&self) -> usize {
        self.evals.load(Ordering::Relaxed)
    }

    pub fn vjps(&self) -> usize {
        self.vjps.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.evals.store(0, Ordering::Relaxed);
        self.vjps.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &D {
        &self.inner
    }
}

impl<D: OdeSystem> OdeSystem for Counting<D> {
    fn state_dim(&self) -> usize {
        self.inner.state_dim()
    }

    fn param_dim(&self) -> usize {
        self.inner.param_dim()
    }

    fn eval(&self, t: f64, z: &[f64], theta: &[f64], dz: &mut [f64]) -> Result<()> {
        self.evals.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(t, z, theta, dz)
    }
}

impl<D: DifferentiableDynamics> DifferentiableDynamics for Counting<D> {
    fn vjp(
        &self,
        t: f64,
        z: &[f64],
        theta: &[f64],
        v: &[f64],
        vjp_z: &mut [f64],
        vjp_theta: &mut [f64],
    ) -> Result<()> {
        self.vjps.fetch_add(1, Ordering::Relaxed);
        self.inner.vjp(t, z, theta, v, vjp_z, vjp_theta)
    }
}
