use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::features::{augmented_features, augmented_features_vjp, FEATURE_DIM};
use super::three_body::DEFAULT_MIN_DISTANCE;
use super::{DifferentiableDynamics, OdeSystem};
use crate::error::{Error, Result};
use crate::vector::ParameterVector;

pub const DEFAULT_HIDDEN: usize = 64;

const POS: usize = 9;
const OUT: usize = 9;

/// Neural three-body model: accelerations from one tanh hidden layer over the augmented features.
///
/// Parameters are flattened as `W1` (hidden × features, row-major), `b1`, `W2` (9 × hidden,
/// row-major), `b2`.
#[derive(Clone, Debug)]
pub struct FcDynamics {
    hidden: usize,
    min_distance: f64,
}

/// Builds the network; `feature_dim` must equal [`FEATURE_DIM`].
pub fn fc_dynamics(feature_dim: usize, hidden: usize) -> Result<FcDynamics> {
    if feature_dim != FEATURE_DIM {
        return Err(Error::DimensionMismatch {
            what: "augmented features",
            expected: FEATURE_DIM,
            found: feature_dim,
        });
    }
    if hidden == 0 {
        return Err(Error::InvalidConfig("hidden width must be positive".into()));
    }
    Ok(FcDynamics {
        hidden,
        min_distance: DEFAULT_MIN_DISTANCE,
    })
}

struct Layout {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    end: usize,
}

impl FcDynamics {
    pub fn hidden(&self) -> usize {
        self.hidden
    }

    fn layout(&self) -> Layout {
        let h = self.hidden;
        let w1 = 0;
        let b1 = w1 + h * FEATURE_DIM;
        let w2 = b1 + h;
        let b2 = w2 + OUT * h;
        Layout {
            w1,
            b1,
            w2,
            b2,
            end: b2 + OUT,
        }
    }

    /// Seeded initial weights: Gaussian with variance `1/fan_in`, output layer scaled by 0.1,
    /// zero biases.
    pub fn init_params(&self, seed: u64) -> ParameterVector {
        let l = self.layout();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut theta = vec![0.0; l.end];
        let n1 = Normal::new(0.0, (1.0 / FEATURE_DIM as f64).sqrt()).expect("valid sigma");
        let n2 = Normal::new(0.0, 0.1 * (1.0 / self.hidden as f64).sqrt()).expect("valid sigma");
        for w in &mut theta[l.w1..l.b1] {
            *w = n1.sample(&mut rng);
        }
        for w in &mut theta[l.w2..l.b2] {
            *w = n2.sample(&mut rng);
        }
        ParameterVector::from_trusted(theta)
    }

    /// Hidden activations for the given features.
    fn hidden_activations(&self, features: &[f64], theta: &[f64]) -> Vec<f64> {
        let l = self.layout();
        (0..self.hidden)
            .map(|h| {
                let row = &theta[l.w1 + h * FEATURE_DIM..l.w1 + (h + 1) * FEATURE_DIM];
                let pre: f64 =
                    row.iter().zip(features).map(|(w, x)| w * x).sum::<f64>() + theta[l.b1 + h];
                pre.tanh()
            })
            .collect()
    }
}

impl OdeSystem for FcDynamics {
    fn state_dim(&self) -> usize {
        2 * POS
    }

    fn param_dim(&self) -> usize {
        (FEATURE_DIM + 1) * self.hidden + (self.hidden + 1) * OUT
    }

    fn eval(&self, _t: f64, z: &[f64], theta: &[f64], dz: &mut [f64]) -> Result<()> {
        let l = self.layout();
        let features = augmented_features(&z[..POS], self.min_distance)?;
        let act = self.hidden_activations(&features, theta);
        dz[..POS].copy_from_slice(&z[POS..]);
        for o in 0..OUT {
            let row = &theta[l.w2 + o * self.hidden..l.w2 + (o + 1) * self.hidden];
            dz[POS + o] = row.iter().zip(&act).map(|(w, a)| w * a).sum::<f64>() + theta[l.b2 + o];
        }
        Ok(())
    }
}

impl DifferentiableDynamics for FcDynamics {
    fn vjp(
        &self,
        _t: f64,
        z: &[f64],
        theta: &[f64],
        v: &[f64],
        vjp_z: &mut [f64],
        vjp_theta: &mut [f64],
    ) -> Result<()> {
        let l = self.layout();
        let h = self.hidden;
        let features = augmented_features(&z[..POS], self.min_distance)?;
        let act = self.hidden_activations(&features, theta);
        let v_acc = &v[POS..];

        vjp_theta[l.b2..l.end].copy_from_slice(v_acc);
        let mut g_pre = vec![0.0; h];
        for o in 0..OUT {
            let row = &theta[l.w2 + o * h..l.w2 + (o + 1) * h];
            let g_row = &mut vjp_theta[l.w2 + o * h..l.w2 + (o + 1) * h];
            for k in 0..h {
                g_row[k] = v_acc[o] * act[k];
                g_pre[k] += row[k] * v_acc[o];
            }
        }
        for k in 0..h {
            g_pre[k] *= 1.0 - act[k] * act[k];
        }
        vjp_theta[l.b1..l.w2].copy_from_slice(&g_pre);

        let mut g_features = vec![0.0; FEATURE_DIM];
        for k in 0..h {
            let row = &theta[l.w1 + k * FEATURE_DIM..l.w1 + (k + 1) * FEATURE_DIM];
            let g_row = &mut vjp_theta[l.w1 + k * FEATURE_DIM..l.w1 + (k + 1) * FEATURE_DIM];
            for f in 0..FEATURE_DIM {
                g_row[f] = g_pre[k] * features[f];
                g_features[f] += row[f] * g_pre[k];
            }
        }

        vjp_z[..POS].fill(0.0);
        augmented_features_vjp(&z[..POS], &g_features, &mut vjp_z[..POS]);
        vjp_z[POS..].copy_from_slice(&v[..POS]);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::testing::{vjp_fd_error, vjp_linearity_error};
    use rand::Rng;

    fn state(rng: &mut ChaCha8Rng) -> Vec<f64> {
        loop {
            let z: Vec<f64> = (0..18).map(|_| rng.random_range(-1.0..1.0)).collect();
            if crate::dynamics::features::check_separation(&z[..9], 0.3).is_ok() {
                return z;
            }
        }
    }

    #[test]
    fn parameter_count() {
        let fc = fc_dynamics(81, 64).unwrap();
        assert_eq!(fc.param_dim(), 82 * 64 + 65 * 9);
        assert_eq!(fc.init_params(0).dim(), fc.param_dim());
        assert!(matches!(
            fc_dynamics(80, 64),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_weights_give_bias_accelerations() {
        let fc = fc_dynamics(81, 8).unwrap();
        let mut theta = vec![0.0; fc.param_dim()];
        let n = theta.len();
        for o in 0..9 {
            theta[n - 9 + o] = o as f64;
        }
        let z = state(&mut ChaCha8Rng::seed_from_u64(1));
        let mut dz = [0.0; 18];
        fc.eval(0.0, &z, &theta, &mut dz).unwrap();
        assert_eq!(&dz[..9], &z[9..]);
        for o in 0..9 {
            assert_eq!(dz[9 + o], o as f64);
        }
    }

    #[test]
    fn vjp_against_finite_differences() {
        let fc = fc_dynamics(81, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..10 {
            let mut theta = fc.init_params(seed).into_inner();
            for w in theta.iter_mut() {
                *w += rng.random_range(-0.05..0.05);
            }
            let z = state(&mut rng);
            let v: Vec<f64> = (0..18).map(|_| rng.random_range(-1.0..1.0)).collect();
            let err = vjp_fd_error(&fc, 0.0, &z, &theta, &v, 1e-5);
            assert!(err < 1e-6, "{err}");
            let v2: Vec<f64> = (0..18).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(vjp_linearity_error(&fc, &z, &theta, &v, &v2, -0.7, 1.9) < 1e-12);
        }
    }
}
