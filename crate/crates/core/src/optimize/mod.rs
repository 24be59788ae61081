//! Trajectory losses, first-order optimizers and the fitting loop.

mod adam;
mod dataset;
mod fit;
mod loss;
mod reference;

pub use adam::{adam_step, lr_schedule, sgd_step, AdamMoments, OptimizerConfig, OptimizerKind};
pub use dataset::{Split, TrajectoryDataset};
pub use fit::{fit, FitReport, Parameterization};
pub use loss::{trajectory_mse, trajectory_mse_loss, MseOptions};
pub use reference::{
    ReferenceSystem, REFERENCE_FIXTURE, REFERENCE_G, REFERENCE_MASSES, REFERENCE_SEED,
};
