use super::{DifferentiableDynamics, OdeSystem};
use crate::error::Result;

pub const DEFAULT_MU: f64 = 0.15;

/// Van der Pol oscillator `y1' = y2`, `y2' = (μ − y1²) y2 − y1` with μ held fixed.
///
/// No trainable parameters: the system is a reversibility diagnostic.
#[derive(Clone, Debug)]
pub struct VanDerPol {
    mu: f64,
}

impl VanDerPol {
    pub fn new(mu: f64) -> Self {
        assert!(mu.is_finite(), "mu must be finite");
        Self { mu }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

impl Default for VanDerPol {
    fn default() -> Self {
        Self::new(DEFAULT_MU)
    }
}

pub fn van_der_pol_dynamics(mu: f64) -> VanDerPol {
    VanDerPol::new(mu)
}

impl OdeSystem for VanDerPol {
    fn state_dim(&self) -> usize {
        2
    }

    fn param_dim(&self) -> usize {
        0
    }

    fn eval(&self, _t: f64, z: &[f64], _theta: &[f64], dz: &mut [f64]) -> Result<()> {
        let (y1, y2) = (z[0], z[1]);
        dz[0] = y2;
        dz[1] = (self.mu - y1 * y1) * y2 - y1;
        Ok(())
    }
}

impl DifferentiableDynamics for VanDerPol {
    fn vjp(
        &self,
        _t: f64,
        z: &[f64],
        _theta: &[f64],
        v: &[f64],
        vjp_z: &mut [f64],
        _vjp_theta: &mut [f64],
    ) -> Result<()> {
        let (y1, y2) = (z[0], z[1]);
        vjp_z[0] = v[1] * (-2.0 * y1 * y2 - 1.0);
        vjp_z[1] = v[0] + v[1] * (self.mu - y1 * y1);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::testing::vjp_fd_error;

    #[test]
    fn initial_condition_derivative() {
        let mut dz = [0.0; 2];
        VanDerPol::default()
            .eval(0.0, &[2.0, 0.0], &[], &mut dz)
            .unwrap();
        assert_eq!(dz, [0.0, -2.0]);
        VanDerPol::default()
            .eval(0.0, &[0.0, 0.0], &[], &mut dz)
            .unwrap();
        assert_eq!(dz, [0.0, 0.0]);
    }

    #[test]
    fn jacobian_transpose_product() {
        let mut vz = [0.0; 2];
        VanDerPol::default()
            .vjp(0.0, &[1.0, 1.0], &[], &[0.0, 1.0], &mut vz, &mut [])
            .unwrap();
        assert_eq!(vz[0], -3.0);
        assert!((vz[1] + 0.85).abs() < 1e-15);
    }

    #[test]
    fn vjp_matches_finite_differences() {
        let err = vjp_fd_error(
            &VanDerPol::default(),
            0.0,
            &[0.4, -1.3],
            &[],
            &[0.7, -0.2],
            1e-5,
        );
        assert!(err < 1e-8, "{err}");
    }
}
