use super::dataset::TrajectoryDataset;
use crate::dynamics::{DifferentiableDynamics, OdeSystem};
use crate::error::Result;
use crate::gradients::{GradientEstimator, GradientResult};
use crate::solvers::Solver;
use crate::vector::ParameterVector;

/// Which state coordinates enter the trajectory loss.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MseOptions {
    /// Compare only the first half of the state (positions); velocities are unobserved.
    pub positions_only: bool,
}

impl Default for MseOptions {
    fn default() -> Self {
        Self {
            positions_only: true,
        }
    }
}

impl MseOptions {
    fn observed(&self, dim: usize) -> usize {
        if self.positions_only {
            dim / 2
        } else {
            dim
        }
    }
}

/// Mean squared error over samples `1..` and the observed coordinates, with its seeds.
fn mse_and_seeds(
    predicted: &[Vec<f64>],
    data: &TrajectoryDataset,
    opts: MseOptions,
) -> (f64, Vec<Vec<f64>>) {
    let dim = data.state_dim();
    let observed = opts.observed(dim);
    let mut seeds = vec![vec![0.0; dim]; predicted.len()];
    let samples = predicted.len() - 1;
    if samples == 0 || observed == 0 {
        return (0.0, seeds);
    }
    let scale = 1.0 / (samples * observed) as f64;
    let mut total = 0.0;
    for (k, (z, y)) in predicted.iter().zip(data.states()).enumerate().skip(1) {
        for c in 0..observed {
            let r = z[c] - y[c];
            total += r * r;
            seeds[k][c] = 2.0 * r * scale;
        }
    }
    (total * scale, seeds)
}

/// Loss and gradient of the trajectory MSE, integrating from the dataset's initial state through
/// every sample time with the estimator's method.
pub fn trajectory_mse_loss<D: DifferentiableDynamics + ?Sized>(
    dynamics: &D,
    theta: &ParameterVector,
    data: &TrajectoryDataset,
    estimator: &GradientEstimator,
    opts: MseOptions,
) -> Result<(f64, GradientResult)> {
    let mut loss = |states: &[Vec<f64>]| Ok(mse_and_seeds(states, data, opts));
    let g = estimator.trajectory(
        dynamics,
        data.initial_state(),
        theta,
        data.times(),
        &mut loss,
    )?;
    Ok((g.result.loss, g.result))
}

/// Forward-only trajectory MSE.
pub fn trajectory_mse<S: OdeSystem + ?Sized>(
    dynamics: &S,
    theta: &[f64],
    data: &TrajectoryDataset,
    solver: &Solver,
    opts: MseOptions,
) -> Result<f64> {
    let mut states = vec![data.initial_state().to_vec()];
    for w in data.times().windows(2) {
        let run = solver.run(
            dynamics,
            states.last().expect("initial state present"),
            theta,
            w[0],
            w[1],
            false,
        )?;
        states.push(run.z_end);
    }
    Ok(mse_and_seeds(&states, data, opts).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::linear_dynamics;
    use crate::gradients::Method;
    use crate::vector::StateVector;

    fn exponential_data(k: f64, times: &[f64]) -> TrajectoryDataset {
        let states = times
            .iter()
            .map(|t| StateVector::new(vec![(k * t).exp()]).unwrap())
            .collect();
        TrajectoryDataset::new(times.to_vec(), states).unwrap()
    }

    #[test]
    fn full_state_loss_and_gradient() {
        let times = [0.0, 0.25, 0.5, 1.0];
        let data = exponential_data(1.0, &times);
        let k = 1.2;
        // L(k) = mean_k (e^{k t} − e^{t})², dL/dk = mean_k 2 (e^{kt} − e^t) t e^{kt}.
        let n = (times.len() - 1) as f64;
        let expected: f64 = times[1..]
            .iter()
            .map(|t| ((k * t).exp() - t.exp()).powi(2))
            .sum::<f64>()
            / n;
        let expected_grad: f64 = times[1..]
            .iter()
            .map(|t| 2.0 * ((k * t).exp() - t.exp()) * t * (k * t).exp())
            .sum::<f64>()
            / n;
        let opts = MseOptions {
            positions_only: false,
        };
        for method in Method::ALL {
            let est = GradientEstimator::new(method, Solver::dopri5(1e-10));
            let (loss, g) = trajectory_mse_loss(
                &linear_dynamics(k),
                &ParameterVector::new(vec![k]).unwrap(),
                &data,
                &est,
                opts,
            )
            .unwrap();
            assert!((loss - expected).abs() < 1e-8, "{method}");
            assert!(
                (g.d_loss_d_theta[0] - expected_grad).abs() < 1e-7,
                "{method}"
            );
        }
        let fwd = trajectory_mse(
            &linear_dynamics(k),
            &[k],
            &data,
            &Solver::dopri5(1e-10),
            opts,
        )
        .unwrap();
        assert!((fwd - expected).abs() < 1e-8);
    }

    #[test]
    fn single_sample_is_zero() {
        let data = exponential_data(1.0, &[0.0]);
        let est = GradientEstimator::new(Method::Aca, Solver::dopri5(1e-6));
        let (loss, g) = trajectory_mse_loss(
            &linear_dynamics(1.0),
            &ParameterVector::new(vec![3.0]).unwrap(),
            &data,
            &est,
            MseOptions::default(),
        )
        .unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(g.d_loss_d_theta.as_slice(), &[0.0]);
    }
}
