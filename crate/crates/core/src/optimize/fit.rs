use super::adam::{adam_step, lr_schedule, sgd_step, AdamMoments, OptimizerConfig, OptimizerKind};
use super::dataset::{Split, TrajectoryDataset};
use super::loss::{trajectory_mse, trajectory_mse_loss, MseOptions};
use crate::dynamics::DifferentiableDynamics;
use crate::error::{Error, Result};
use crate::gradients::{CostStats, GradientEstimator};
use crate::vector::ParameterVector;

/// How the optimizer's variables map to the model parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parameterization {
    /// The optimizer moves `θ` directly.
    Identity,
    /// The optimizer moves `log θ`, keeping every parameter positive.
    Log,
}

impl Parameterization {
    fn to_internal(self, theta: &[f64]) -> Result<Vec<f64>> {
        match self {
            Parameterization::Identity => Ok(theta.to_vec()),
            Parameterization::Log => {
                if theta.iter().any(|&t| !(t > 0.0)) {
                    return Err(Error::InvalidConfig(
                        "log parameterization needs positive parameters".into(),
                    ));
                }
                Ok(theta.iter().map(|t| t.ln()).collect())
            }
        }
    }

    fn to_model(self, phi: &[f64]) -> Result<ParameterVector> {
        match self {
            Parameterization::Identity => ParameterVector::new(phi.to_vec()),
            Parameterization::Log => ParameterVector::new(phi.iter().map(|p| p.exp()).collect()),
        }
    }

    /// Chain rule from `dL/dθ` to `dL/dφ`.
    fn pullback(self, theta: &[f64], grad: &[f64]) -> Vec<f64> {
        match self {
            Parameterization::Identity => grad.to_vec(),
            Parameterization::Log => grad.iter().zip(theta).map(|(g, t)| g * t).collect(),
        }
    }
}

/// Outcome of a fit.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub final_theta: ParameterVector,
    /// Train loss at the start of every epoch.
    pub loss_history: Vec<f64>,
    /// Train MSE at `final_theta`.
    pub train_mse: f64,
    /// MSE over the test split, integrated from the initial condition with `final_theta`.
    pub test_mse: f64,
    pub grad_stats: CostStats,
}

/// Full-batch gradient descent on the train split with the decaying learning-rate schedule.
pub fn fit<D: DifferentiableDynamics + ?Sized>(
    dynamics: &D,
    dataset: &TrajectoryDataset,
    theta0: &ParameterVector,
    opt: &OptimizerConfig,
    estimator: &GradientEstimator,
    parameterization: Parameterization,
    mse: MseOptions,
) -> Result<FitReport> {
    opt.validate()?;
    let train = dataset.split(Split::Train);
    if train.len() < 2 {
        return Err(Error::InvalidConfig(
            "train split needs at least one sample after t0".into(),
        ));
    }
    let mut phi = parameterization.to_internal(theta0)?;
    let mut moments = AdamMoments::zeros(phi.len());
    let mut history = Vec::with_capacity(opt.epochs);
    let mut stats = CostStats::default();

    for epoch in 0..opt.epochs {
        let theta = parameterization
            .to_model(&phi)
            .map_err(|_| diverged(dynamics, &train, &phi, epoch, estimator))?;
        let (loss, grad) = match trajectory_mse_loss(dynamics, &theta, &train, estimator, mse) {
            Ok(r) if r.0.is_finite() => r,
            _ => return Err(diverged(dynamics, &train, &theta, epoch, estimator)),
        };
        history.push(loss);
        stats += grad.stats;
        let g = parameterization.pullback(&theta, &grad.d_loss_d_theta);
        let lr = lr_schedule(opt.initial_lr, opt.decay, epoch);
        phi = match opt.kind {
            OptimizerKind::Adam => {
                let (next, m) = adam_step(&phi, &g, &moments, epoch + 1, lr, opt)?;
                moments = m;
                next
            }
            OptimizerKind::Sgd => sgd_step(&phi, &g, lr)?,
        };
    }

    let final_theta = parameterization
        .to_model(&phi)
        .map_err(|_| diverged(dynamics, &train, &phi, opt.epochs, estimator))?;
    let solver = &estimator.solver;
    let train_mse = trajectory_mse(dynamics, &final_theta, &train, solver, mse)
        .map_err(|_| diverged(dynamics, &train, &final_theta, opt.epochs, estimator))?;
    let test = dataset.split(Split::Test);
    let test_mse = trajectory_mse(dynamics, &final_theta, &test, solver, mse)
        .map_err(|_| diverged(dynamics, &test, &final_theta, opt.epochs, estimator))?;
    Ok(FitReport {
        final_theta,
        loss_history: history,
        train_mse,
        test_mse,
        grad_stats: stats,
    })
}

/// Builds a `Diverged` error naming the first sample interval whose forward solve fails or turns
/// non-finite; the whole span when every segment integrates.
fn diverged<D: DifferentiableDynamics + ?Sized>(
    dynamics: &D,
    data: &TrajectoryDataset,
    theta: &[f64],
    epoch: usize,
    estimator: &GradientEstimator,
) -> Error {
    let times = data.times();
    let span = Error::Diverged {
        epoch,
        t_start: times[0],
        t_end: times[times.len() - 1],
    };
    if theta.iter().any(|t| !t.is_finite()) {
        return span;
    }
    let mut z = data.initial_state().to_vec();
    for w in times.windows(2) {
        match estimator.solver.run(dynamics, &z, theta, w[0], w[1], false) {
            Ok(run) => z = run.z_end,
            Err(_) => {
                return Error::Diverged {
                    epoch,
                    t_start: w[0],
                    t_end: w[1],
                }
            }
        }
    }
    span
}
