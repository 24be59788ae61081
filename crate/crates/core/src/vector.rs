//! Finite-valued state and parameter vectors.

use std::ops::Deref;

use crate::error::{Error, Result};

macro_rules! finite_vector {
    ($(#[$meta:meta])* $name:ident, $what:literal) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Default)]
        pub struct $name(Vec<f64>);

        impl $name {
            /// Wraps `values`, rejecting NaN and infinite entries.
            pub fn new(values: Vec<f64>) -> Result<Self> {
                if values.iter().all(|v| v.is_finite()) {
                    Ok(Self(values))
                } else {
                    Err(Error::NonFiniteInput { what: $what })
                }
            }

            pub fn zeros(dim: usize) -> Self {
                Self(vec![0.0; dim])
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }

            /// Wraps values already known to be finite.
            pub(crate) fn from_trusted(values: Vec<f64>) -> Self {
                debug_assert!(values.iter().all(|v| v.is_finite()));
                Self(values)
            }
        }

        impl Deref for $name {
            type Target = [f64];

            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl TryFrom<Vec<f64>> for $name {
            type Error = Error;

            fn try_from(values: Vec<f64>) -> Result<Self> {
                Self::new(values)
            }
        }

        impl TryFrom<&[f64]> for $name {
            type Error = Error;

            fn try_from(values: &[f64]) -> Result<Self> {
                Self::new(values.to_vec())
            }
        }
    };
}

finite_vector!(
    /// ODE state `z(t)`. The dimension is fixed at construction.
    StateVector,
    "state vector"
);

finite_vector!(
    /// Dynamics parameters `θ`. May be empty.
    ParameterVector,
    "parameter vector"
);
