use super::{DifferentiableDynamics, OdeSystem};
use crate::error::Result;
use crate::vector::ParameterVector;

/// `dz/dt = k z`, applied elementwise. The single parameter is `k`.
#[derive(Clone, Debug)]
pub struct Linear {
    dim: usize,
    k: f64,
}

impl Linear {
    pub fn new(dim: usize, k: f64) -> Self {
        assert!(dim >= 1, "state dimension must be positive");
        Self { dim, k }
    }

    /// Nominal parameter vector `[k]`.
    pub fn params(&self) -> ParameterVector {
        ParameterVector::from_trusted(vec![self.k])
    }
}

/// Scalar linear dynamics `dz/dt = k z`.
pub fn linear_dynamics(k: f64) -> Linear {
    Linear::new(1, k)
}

impl OdeSystem for Linear {
    fn state_dim(&self) -> usize {
        self.dim
    }

    fn param_dim(&self) -> usize {
        1
    }

    fn eval(&self, _t: f64, z: &[f64], theta: &[f64], dz: &mut [f64]) -> Result<()> {
        let k = theta[0];
        for (d, zi) in dz.iter_mut().zip(z) {
            *d = k * zi;
        }
        Ok(())
    }
}

impl DifferentiableDynamics for Linear {
    fn vjp(
        &self,
        _t: f64,
        z: &[f64],
        theta: &[f64],
        v: &[f64],
        vjp_z: &mut [f64],
        vjp_theta: &mut [f64],
    ) -> Result<()> {
        let k = theta[0];
        let mut dk = 0.0;
        for ((out, vi), zi) in vjp_z.iter_mut().zip(v).zip(z) {
            *out = k * vi;
            dk += vi * zi;
        }
        vjp_theta[0] = dk;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::testing::{vjp_fd_error, vjp_linearity_error};

    #[test]
    fn evaluates_k_times_z() {
        let mut dz = [0.0];
        linear_dynamics(1.0)
            .eval(0.0, &[1.0], &[1.0], &mut dz)
            .unwrap();
        assert_eq!(dz, [1.0]);
        linear_dynamics(0.0)
            .eval(0.0, &[3.7], &[0.0], &mut dz)
            .unwrap();
        assert_eq!(dz, [0.0]);
    }

    #[test]
    fn hand_differentiated_vjp() {
        let (mut vz, mut vk) = ([0.0], [0.0]);
        linear_dynamics(2.0)
            .vjp(0.0, &[1.5], &[2.0], &[1.0], &mut vz, &mut vk)
            .unwrap();
        assert_eq!(vz, [2.0]);
        assert_eq!(vk, [1.5]);
    }

    #[test]
    fn vjp_matches_finite_differences() {
        let lin = Linear::new(3, 0.7);
        let err = vjp_fd_error(
            &lin,
            0.0,
            &[0.3, -1.2, 2.0],
            &[0.7],
            &[1.0, 0.5, -0.25],
            1e-5,
        );
        assert!(err < 1e-8, "{err}");
        let lin_err = vjp_linearity_error(
            &lin,
            &[0.3, -1.2, 2.0],
            &[0.7],
            &[1.0, 2.0, 3.0],
            &[-1.0, 0.1, 4.0],
            1.5,
            -0.3,
        );
        assert!(lin_err < 1e-12);
    }
}
