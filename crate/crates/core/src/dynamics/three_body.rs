use std::f64::consts::PI;

use super::features::{check_separation, BODIES};
use super::{DifferentiableDynamics, OdeSystem};
use crate::error::Result;

/// `G` in AU³ / (solar mass · year²).
pub const GRAVITATIONAL_CONSTANT: f64 = 4.0 * PI * PI;

/// Pairwise distance below which evaluation fails instead of producing huge accelerations.
pub const DEFAULT_MIN_DISTANCE: f64 = 1e-8;

const POS: usize = BODIES * 3;

/// Newtonian gravity between three point masses.
///
/// State layout: nine position coordinates followed by nine velocity coordinates.
/// The parameters are the three masses.
#[derive(Clone, Debug)]
pub struct ThreeBody {
    g: f64,
    min_distance: f64,
}

impl ThreeBody {
    pub fn new(g: f64) -> Self {
        assert!(g > 0.0 && g.is_finite(), "G must be positive");
        Self {
            g,
            min_distance: DEFAULT_MIN_DISTANCE,
        }
    }

    pub fn with_min_distance(mut self, min_distance: f64) -> Self {
        self.min_distance = min_distance;
        self
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// Writes the nine accelerations for `positions` into `acc`.
    pub fn accelerations(&self, positions: &[f64], masses: &[f64], acc: &mut [f64]) -> Result<()> {
        check_separation(positions, self.min_distance)?;
        acc[..POS].fill(0.0);
        for i in 0..BODIES {
            for (j, &mj) in masses.iter().enumerate().take(BODIES) {
                if i == j {
                    continue;
                }
                let d = delta(positions, i, j);
                let rho = norm(&d);
                let s = self.g * mj / (rho * rho * rho);
                for a in 0..3 {
                    acc[3 * i + a] -= s * d[a];
                }
            }
        }
        Ok(())
    }

    /// Kinetic plus potential energy of a full 18-dimensional state.
    pub fn energy(&self, z: &[f64], masses: &[f64]) -> f64 {
        let mut kinetic = 0.0;
        for i in 0..BODIES {
            let v = &z[POS + 3 * i..POS + 3 * i + 3];
            kinetic += 0.5 * masses[i] * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        }
        let mut potential = 0.0;
        for i in 0..BODIES {
            for j in (i + 1)..BODIES {
                potential -= self.g * masses[i] * masses[j] / norm(&delta(z, i, j));
            }
        }
        kinetic + potential
    }

    /// Total linear momentum `Σ m_i v_i`.
    pub fn momentum(&self, z: &[f64], masses: &[f64]) -> [f64; 3] {
        let mut p = [0.0; 3];
        for i in 0..BODIES {
            for a in 0..3 {
                p[a] += masses[i] * z[POS + 3 * i + a];
            }
        }
        p
    }
}

/// Three-body gravity with gravitational constant `g`; masses are the parameters.
pub fn three_body_dynamics(g: f64) -> ThreeBody {
    ThreeBody::new(g)
}

fn delta(positions: &[f64], i: usize, j: usize) -> [f64; 3] {
    [
        positions[3 * i] - positions[3 * j],
        positions[3 * i + 1] - positions[3 * j + 1],
        positions[3 * i + 2] - positions[3 * j + 2],
    ]
}

fn norm(d: &[f64; 3]) -> f64 {
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

impl OdeSystem for ThreeBody {
    fn state_dim(&self) -> usize {
        2 * POS
    }

    fn param_dim(&self) -> usize {
        BODIES
    }

    fn eval(&self, _t: f64, z: &[f64], theta: &[f64], dz: &mut [f64]) -> Result<()> {
        dz[..POS].copy_from_slice(&z[POS..]);
        self.accelerations(&z[..POS], theta, &mut dz[POS..])
    }
}

impl DifferentiableDynamics for ThreeBody {
    fn vjp(
        &self,
        _t: f64,
        z: &[f64],
        theta: &[f64],
        v: &[f64],
        vjp_z: &mut [f64],
        vjp_theta: &mut [f64],
    ) -> Result<()> {
        check_separation(&z[..POS], self.min_distance)?;
        // Positions feed the accelerations; velocities pass straight through.
        vjp_z[..POS].fill(0.0);
        vjp_z[POS..].copy_from_slice(&v[..POS]);
        vjp_theta.fill(0.0);
        let va = &v[POS..];
        for i in 0..BODIES {
            let u = &va[3 * i..3 * i + 3];
            for j in 0..BODIES {
                if i == j {
                    continue;
                }
                let d = delta(z, i, j);
                let rho = norm(&d);
                let rho3 = rho * rho * rho;
                let ud = u[0] * d[0] + u[1] * d[1] + u[2] * d[2];
                vjp_theta[j] -= self.g * ud / rho3;
                let s = self.g * theta[j];
                let radial = 3.0 * ud / (rho3 * rho * rho);
                for a in 0..3 {
                    let w = -s * (u[a] / rho3 - radial * d[a]);
                    vjp_z[3 * i + a] += w;
                    vjp_z[3 * j + a] -= w;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::testing::{vjp_fd_error, vjp_linearity_error};
    use crate::error::Error;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng) -> Vec<f64> {
        loop {
            let z: Vec<f64> = (0..18).map(|_| rng.random_range(-1.0..1.0)).collect();
            if check_separation(&z[..9], 0.2).is_ok() {
                return z;
            }
        }
    }

    #[test]
    fn single_pair_acceleration() {
        // Body 3 is placed far away and massless, so only the 1-2 pair contributes.
        let tb = ThreeBody::new(1.0);
        let pos = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1e6, 0.0, 0.0];
        let mut acc = [0.0; 9];
        tb.accelerations(&pos, &[1.0, 2.5, 0.0], &mut acc).unwrap();
        assert!((acc[0] - 2.5).abs() < 1e-15);
        assert_eq!(acc[1], 0.0);
        assert!((acc[3] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn equilateral_points_at_centroid() {
        let tb = ThreeBody::new(1.0);
        let s3 = 3f64.sqrt();
        let pos = [1.0, 0.0, 0.0, -0.5, s3 / 2.0, 0.0, -0.5, -s3 / 2.0, 0.0];
        let mut acc = [0.0; 9];
        tb.accelerations(&pos, &[1.0, 1.0, 1.0], &mut acc).unwrap();
        let mags: Vec<f64> = (0..3)
            .map(|i| norm(&[acc[3 * i], acc[3 * i + 1], acc[3 * i + 2]]))
            .collect();
        for i in 0..3 {
            assert!((mags[i] - mags[0]).abs() < 1e-12);
            // Centroid is the origin: acceleration is antiparallel to the position.
            let dot: f64 = (0..3).map(|a| acc[3 * i + a] * pos[3 * i + a]).sum();
            assert!((dot + mags[i] * 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn momentum_derivative_vanishes() {
        let tb = ThreeBody::new(GRAVITATIONAL_CONSTANT);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let z = random_state(&mut rng);
            let m: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..5.0)).collect();
            let mut dz = [0.0; 18];
            tb.eval(0.0, &z, &m, &mut dz).unwrap();
            for a in 0..3 {
                let total: f64 = (0..3).map(|i| m[i] * dz[9 + 3 * i + a]).sum();
                let scale: f64 = (0..3)
                    .map(|i| (m[i] * dz[9 + 3 * i + a]).abs())
                    .sum::<f64>()
                    .max(1.0);
                assert!(total.abs() < 1e-12 * scale, "{total}");
            }
        }
    }

    #[test]
    fn collision_is_an_error() {
        let tb = ThreeBody::new(1.0);
        let mut z = [0.0; 18];
        z[3] = 1e-9;
        z[6] = 1.0;
        let mut dz = [0.0; 18];
        assert!(matches!(
            tb.eval(0.0, &z, &[1.0, 1.0, 1.0], &mut dz),
            Err(Error::CollinearSingularity { .. })
        ));
    }

    #[test]
    fn vjp_against_finite_differences() {
        let tb = ThreeBody::new(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let z = random_state(&mut rng);
            let m: Vec<f64> = (0..3).map(|_| rng.random_range(0.5..3.0)).collect();
            let v: Vec<f64> = (0..18).map(|_| rng.random_range(-1.0..1.0)).collect();
            let err = vjp_fd_error(&tb, 0.0, &z, &m, &v, 1e-5);
            assert!(err < 1e-5, "{err}");
            let v2: Vec<f64> = (0..18).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(vjp_linearity_error(&tb, &z, &m, &v, &v2, 0.3, -2.0) < 1e-12);
        }
    }
}
