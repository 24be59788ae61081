use std::path::PathBuf;

/// Errors raised by integration, gradient estimation, fitting and the harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(
        "bodies {i} and {j} are {distance:e} apart, below the singularity threshold {threshold:e}"
    )]
    CollinearSingularity {
        i: usize,
        j: usize,
        distance: f64,
        threshold: f64,
    },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {what}")]
    NonFiniteInput { what: &'static str },

    #[error("non-finite state encountered at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("step size underflow at t = {t}: proposed h = {h:e} is below h_min = {h_min:e}")]
    StepUnderflow { t: f64, h: f64, h_min: f64 },

    #[error("exceeded the maximum of {max_steps} accepted steps at t = {t}")]
    MaxStepsExceeded { t: f64, max_steps: usize },

    #[error("exceeded {max_rejects} consecutive rejected trial steps at t = {t}")]
    MaxRejectsExceeded { t: f64, max_rejects: usize },

    #[error("recomputed step {index} does not reproduce the checkpointed state")]
    CacheMismatch { index: usize },

    #[error("solver tape grew to {nodes} nodes, over the budget of {budget}")]
    TapeOverflow { nodes: usize, budget: usize },

    #[error("unknown gradient method `{0}` (expected naive, adjoint or aca)")]
    UnknownMethod(String),

    #[error("unknown tableau `{0}`")]
    UnknownTableau(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("convergence fit is degenerate: error {error:e} at h = {h:e} is at machine precision")]
    DegenerateFit { h: f64, error: f64 },

    #[error("loss is not finite at the probe point")]
    NonFiniteLoss,

    #[error("training diverged at epoch {epoch} on the interval [{t_start}, {t_end}]")]
    Diverged {
        epoch: usize,
        t_start: f64,
        t_end: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("schema check failed for {path}: {reason}")]
    Schema { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
