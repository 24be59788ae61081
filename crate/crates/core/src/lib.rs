// `!(x > y)` is used deliberately so NaN fails validation; solver kernels take many scalars.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod gradients;
pub mod harness;
pub mod optimize;
pub mod solvers;
pub mod vector;
