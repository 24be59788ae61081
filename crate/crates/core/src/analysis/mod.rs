//! Verification instruments: a finite-difference oracle, empirical convergence orders, and
//! forward/reverse reconstruction error.

mod convergence;
mod fd;
mod reverse;

pub use convergence::{convergence_order, convergence_series, loglog_slope, ConvergencePoint};
pub use fd::{fd_directional, fd_gradient, relative_error, FdOracleConfig};
pub use reverse::{
    checkpoint_replay, reverse_error_vs_step, reverse_error_vs_tolerance, reverse_reconstruction,
    ReplayReport, ReverseErrorPoint, ReverseErrorReport,
};
