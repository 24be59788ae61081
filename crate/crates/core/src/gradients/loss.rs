use crate::error::{Error, Result};
use crate::vector::StateVector;

/// Loss on the terminal state `z(T)`.
#[derive(Clone, Debug, PartialEq)]
pub enum TerminalLoss {
    /// `J = Σ z(T)²`.
    SquaredState,
    /// `J = mean((z(T) − target)²)`.
    MseToTarget(StateVector),
}

/// Returns `J(z_T)` and the seed `∂J/∂z(T)`.
pub fn terminal_loss_grad(loss: &TerminalLoss, z_t: &[f64]) -> Result<(f64, StateVector)> {
    if z_t.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput {
            what: "terminal state",
        });
    }
    match loss {
        TerminalLoss::SquaredState => {
            let value = z_t.iter().map(|z| z * z).sum();
            let seed = z_t.iter().map(|z| 2.0 * z).collect();
            Ok((value, StateVector::from_trusted(seed)))
        }
        TerminalLoss::MseToTarget(target) => {
            if target.dim() != z_t.len() {
                return Err(Error::DimensionMismatch {
                    what: "loss target",
                    expected: z_t.len(),
                    found: target.dim(),
                });
            }
            let n = z_t.len() as f64;
            let value = z_t
                .iter()
                .zip(target.iter())
                .map(|(z, y)| (z - y).powi(2))
                .sum::<f64>()
                / n;
            let seed = z_t
                .iter()
                .zip(target.iter())
                .map(|(z, y)| 2.0 * (z - y) / n)
                .collect();
            Ok((value, StateVector::from_trusted(seed)))
        }
    }
}
