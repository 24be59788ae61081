use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::Sgd => "sgd",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "adam" => Ok(OptimizerKind::Adam),
            "sgd" => Ok(OptimizerKind::Sgd),
            other => Err(Error::InvalidConfig(format!("unknown optimizer '{other}'"))),
        }
    }
}

/// Optimizer and learning-rate schedule. The default is the ODE-model schedule: Adam, initial
/// rate 0.1, decay 0.99 per epoch, 100 epochs.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub initial_lr: f64,
    pub decay: f64,
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Seed for any randomized initialization done on behalf of the fit.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            kind: OptimizerKind::Adam,
            initial_lr: 0.1,
            decay: 0.99,
            epochs: 100,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "initial_lr must be positive, got {}",
                self.initial_lr
            )));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "decay must lie in (0, 1], got {}",
                self.decay
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        let beta_ok = |b: f64| (0.0..1.0).contains(&b);
        if !beta_ok(self.adam_beta1) || !beta_ok(self.adam_beta2) || !(self.adam_eps > 0.0) {
            return Err(Error::InvalidConfig(
                "Adam betas must lie in [0, 1) and eps must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `initial_lr · decay^epoch`.
pub fn lr_schedule(initial_lr: f64, decay: f64, epoch: usize) -> f64 {
    initial_lr * decay.powi(epoch as i32)
}

/// First and second moment estimates carried between Adam steps.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamMoments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamMoments {
    pub fn zeros(dim: usize) -> Self {
        Self {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
        }
    }
}

fn check_shapes(theta: &[f64], grad: &[f64]) -> Result<()> {
    if theta.len() != grad.len() {
        return Err(Error::DimensionMismatch {
            what: "gradient",
            expected: theta.len(),
            found: grad.len(),
        });
    }
    Ok(())
}

/// One bias-corrected Adam update; `step_index` counts from 1.
pub fn adam_step(
    theta: &[f64],
    grad: &[f64],
    moments: &AdamMoments,
    step_index: usize,
    lr: f64,
    cfg: &OptimizerConfig,
) -> Result<(Vec<f64>, AdamMoments)> {
    check_shapes(theta, grad)?;
    if moments.m.len() != theta.len() || moments.v.len() != theta.len() {
        return Err(Error::DimensionMismatch {
            what: "Adam moments",
            expected: theta.len(),
            found: moments.m.len(),
        });
    }
    if step_index == 0 {
        return Err(Error::InvalidConfig("Adam step index starts at 1".into()));
    }
    let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
    let c1 = 1.0 - b1.powi(step_index as i32);
    let c2 = 1.0 - b2.powi(step_index as i32);
    let mut next = AdamMoments::zeros(theta.len());
    let mut out = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let g = grad[i];
        next.m[i] = b1 * moments.m[i] + (1.0 - b1) * g;
        next.v[i] = b2 * moments.v[i] + (1.0 - b2) * g * g;
        let m_hat = next.m[i] / c1;
        let v_hat = next.v[i] / c2;
        out.push(theta[i] - lr * m_hat / (v_hat.sqrt() + cfg.adam_eps));
    }
    Ok((out, next))
}

/// Plain gradient descent: `θ − lr · g`.
pub fn sgd_step(theta: &[f64], grad: &[f64], lr: f64) -> Result<Vec<f64>> {
    check_shapes(theta, grad)?;
    Ok(theta.iter().zip(grad).map(|(t, g)| t - lr * g).collect())
}
