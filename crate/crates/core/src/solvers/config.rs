use crate::error::{Error, Result};

/// Step-size control settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude; `None` selects it with [`initial_step`](super::initial_step).
    pub h_init: Option<f64>,
    pub safety: f64,
    pub min_factor: f64,
    pub max_factor: f64,
    pub max_rejects_per_step: usize,
    pub max_steps: usize,
    /// Smallest admissible proposed step; `None` means `1e-12 · |T − t0|`.
    pub h_min: Option<f64>,
    /// Forces constant steps `(T − t0)/n`, even for embedded tableaux.
    pub fixed_steps: Option<usize>,
}

impl Default for SolverConfig {
    /// `rtol = 1e-3`, `atol = 1e-6` (the usual ode45 defaults).
    fn default() -> Self {
        Self {
            rtol: 1e-3,
            atol: 1e-6,
            h_init: None,
            safety: 0.9,
            min_factor: 0.2,
            max_factor: 10.0,
            max_rejects_per_step: 20,
            max_steps: 1_000_000,
            h_min: None,
            fixed_steps: None,
        }
    }
}

impl SolverConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn fixed(steps: usize) -> Self {
        Self {
            fixed_steps: Some(steps),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("rtol and atol must be positive");
        }
        if !(self.min_factor > 0.0 && self.min_factor < 1.0 && self.max_factor > 1.0) {
            return bad("need 0 < min_factor < 1 < max_factor");
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return bad("need 0 < safety < 1");
        }
        if matches!(self.h_init, Some(h) if !(h > 0.0 && h.is_finite())) {
            return bad("h_init must be positive");
        }
        if self.fixed_steps == Some(0) {
            return bad("fixed_steps must be at least 1");
        }
        Ok(())
    }

    pub(crate) fn h_min_for(&self, span: f64) -> f64 {
        self.h_min.unwrap_or(1e-12 * span.abs())
    }
}
