use crate::error::{Error, Result};
use crate::vector::ParameterVector;

/// Central finite-difference settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdOracleConfig {
    pub epsilon: f64,
}

impl Default for FdOracleConfig {
    fn default() -> Self {
        Self { epsilon: 1e-5 }
    }
}

impl FdOracleConfig {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "fd epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

fn probe<F: FnMut(&[f64]) -> Result<f64>>(loss: &mut F, x: &[f64]) -> Result<f64> {
    let v = loss(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteLoss)
    }
}

/// `(L(θ + εe_i) − L(θ − εe_i)) / 2ε` for every coordinate.
pub fn fd_gradient<F>(mut loss: F, theta: &[f64], cfg: &FdOracleConfig) -> Result<ParameterVector>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    let eps = cfg.epsilon;
    let mut x = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        x[i] = theta[i] + eps;
        let plus = probe(&mut loss, &x)?;
        x[i] = theta[i] - eps;
        let minus = probe(&mut loss, &x)?;
        x[i] = theta[i];
        grad.push((plus - minus) / (2.0 * eps));
    }
    ParameterVector::new(grad).map_err(|_| Error::NonFiniteLoss)
}

/// Central difference along one direction: `(L(θ + εd) − L(θ − εd)) / 2ε ≈ ∇Lᵀd`.
pub fn fd_directional<F>(
    mut loss: F,
    theta: &[f64],
    direction: &[f64],
    cfg: &FdOracleConfig,
) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    if direction.len() != theta.len() {
        return Err(Error::DimensionMismatch {
            what: "direction",
            expected: theta.len(),
            found: direction.len(),
        });
    }
    let eps = cfg.epsilon;
    let shifted = |s: f64| -> Vec<f64> {
        theta
            .iter()
            .zip(direction)
            .map(|(t, d)| t + s * d)
            .collect()
    };
    let plus = probe(&mut loss, &shifted(eps))?;
    let minus = probe(&mut loss, &shifted(-eps))?;
    Ok((plus - minus) / (2.0 * eps))
}

/// `‖a − b‖∞ / ‖b‖∞`, falling back to the absolute error when `b` vanishes.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = b.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square() {
        let g = fd_gradient(
            |x| Ok(x[0] * x[0]),
            &[3.0],
            &FdOracleConfig { epsilon: 1e-4 },
        )
        .unwrap();
        assert!((g[0] - 6.0).abs() < 1e-7);
    }

    #[test]
    fn constant_loss_gives_zero() {
        let g = fd_gradient(|_| Ok(2.5), &[1.0, -2.0, 0.3], &FdOracleConfig::default()).unwrap();
        assert_eq!(g.as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn toy_loss_in_k() {
        let g = fd_gradient(
            |k| Ok((2.0 * k[0]).exp()),
            &[1.0],
            &FdOracleConfig::default(),
        )
        .unwrap();
        assert!((g[0] - 2.0 * 1f64.exp().powi(2)).abs() < 1e-4);
    }

    #[test]
    fn mirrored_loss_negates() {
        let loss = |x: &[f64]| Ok(x[0].powi(3) - 2.0 * x[0] * x[1] + x[1].sin());
        let c = [0.7, -0.4];
        let at = [0.9, -0.1];
        let cfg = FdOracleConfig::default();
        let g = fd_gradient(loss, &at, &cfg).unwrap();
        let mirrored = |x: &[f64]| {
            let y: Vec<f64> = x.iter().zip(&c).map(|(x, c)| 2.0 * c - x).collect();
            loss(&y)
        };
        let at_m: Vec<f64> = at.iter().zip(&c).map(|(x, c)| 2.0 * c - x).collect();
        let gm = fd_gradient(mirrored, &at_m, &cfg).unwrap();
        for (a, b) in g.iter().zip(gm.iter()) {
            assert!((a + b).abs() < 1e-9);
        }
    }

    #[test]
    fn directional_matches_gradient() {
        let loss = |x: &[f64]| Ok(x[0] * x[1] + x[1] * x[1]);
        let d =
            fd_directional(loss, &[1.0, 2.0], &[0.5, -1.0], &FdOracleConfig::default()).unwrap();
        assert!((d - (2.0 * 0.5 - 5.0)).abs() < 1e-8);
    }

    #[test]
    fn nonfinite_probe_is_an_error() {
        let err =
            fd_gradient(|x| Ok(1.0 / x[0]), &[0.0], &FdOracleConfig { epsilon: 0.0 }).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
        let err = fd_gradient(
            |x| Ok((x[0] - 1e-5).ln()),
            &[0.0],
            &FdOracleConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFiniteLoss));
    }

    #[test]
    fn relative_error_scales() {
        assert!((relative_error(&[1.1, 2.0], &[1.0, 2.0]) - 0.05).abs() < 1e-15);
        assert_eq!(relative_error(&[0.5], &[0.0]), 0.5);
    }
}
