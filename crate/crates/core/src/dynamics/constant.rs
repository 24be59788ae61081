use super::{DifferentiableDynamics, OdeSystem};
use crate::error::Result;

/// `dz/dt = c`. Every explicit Runge–Kutta method integrates this exactly.
#[derive(Clone, Debug)]
pub struct Constant {
    rate: Vec<f64>,
}

impl Constant {
    pub fn new(rate: Vec<f64>) -> Self {
        Self { rate }
    }

    /// `f ≡ 0` in `dim` dimensions.
    pub fn zero(dim: usize) -> Self {
        Self::new(vec![0.0; dim])
    }
}

impl OdeSystem for Constant {
    fn state_dim(&self) -> usize {
        self.rate.len()
    }

    fn param_dim(&self) -> usize {
        0
    }

    fn eval(&self, _t: f64, _z: &[f64], _theta: &[f64], dz: &mut [f64]) -> Result<()> {
        dz.copy_from_slice(&self.rate);
        Ok(())
    }
}

impl DifferentiableDynamics for Constant {
    fn vjp(
        &self,
        _t: f64,
        _z: &[f64],
        _theta: &[f64],
        _v: &[f64],
        vjp_z: &mut [f64],
        _vjp_theta: &mut [f64],
    ) -> Result<()> {
        vjp_z.fill(0.0);
        Ok(())
    }
}
