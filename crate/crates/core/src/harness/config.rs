use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gradients::Method;

/// Documented configuration keys, shown by `--help`.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    (
        "methods",
        "comma-separated gradient methods: naive, adjoint, aca (default: all three)",
    ),
    (
        "tableau",
        "Butcher tableau name (default: dopri5; convergence: all fixed-step tableaux)",
    ),
    (
        "rtol",
        "relative tolerance (toy-gradient 1e-5, vdp-reverse 1e-3, gradcheck 1e-7, three-body 1e-5)",
    ),
    (
        "atol",
        "absolute tolerance (toy-gradient 1e-5, vdp-reverse 1e-6, gradcheck 1e-7, three-body 1e-5)",
    ),
    (
        "seed",
        "random seed for generated inputs and initial weights (default 0)",
    ),
    (
        "horizons",
        "toy-gradient: comma-separated end times (default 1,2,...,10)",
    ),
    ("k", "toy-gradient: growth rate (default 1)"),
    ("z0", "toy-gradient: initial value (default 1)"),
    ("t_end", "vdp-reverse: horizon (default 25)"),
    ("mu", "vdp-reverse: damping parameter (default 0.15)"),
    (
        "y0",
        "vdp-reverse: initial state, two comma-separated values (default 2,0)",
    ),
    (
        "samples",
        "vdp-reverse: trajectory samples written per pass (default 200)",
    ),
    (
        "reverse_h_exponents",
        "vdp-reverse: fixed-step RK4 step sizes 2^-a..2^-b as a..b (default 4..9)",
    ),
    (
        "reverse_t_end",
        "vdp-reverse: horizon of the fixed-step series (default 2)",
    ),
    (
        "h_exponents",
        "convergence: step sizes 2^-a..2^-b for euler/rk2/rk4 as a..b (default 2..7)",
    ),
    (
        "dopri5_h_exponents",
        "convergence: step sizes for fixed-step dopri5 (default 2..6)",
    ),
    (
        "slope_tolerance",
        "convergence: allowed deviation from the nominal order (default 0.3)",
    ),
    (
        "probes",
        "gradcheck: random directional probes per problem (default 100)",
    ),
    (
        "fd_epsilon",
        "gradcheck: central-difference step (default 1e-5)",
    ),
    (
        "problems",
        "gradcheck: comma-separated subset of linear, fc, three_body (default all)",
    ),
    (
        "fixture",
        "three-body: dataset path (default: the committed reference fixture)",
    ),
    (
        "model",
        "three-body: ode (masses unknown) or node (neural dynamics) (default ode)",
    ),
    (
        "hidden",
        "three-body: hidden width of the node model (default 64)",
    ),
    ("epochs", "three-body: training epochs (default 100)"),
    ("lr", "three-body: initial learning rate (default 0.1)"),
    (
        "decay",
        "three-body: per-epoch learning-rate decay (default 0.99)",
    ),
    (
        "init_scale",
        "three-body: initial masses as a multiple of the true masses (default 2)",
    ),
];

/// Flat key/value settings with typed, defaulted lookups. Every lookup is recorded so the
/// manifest can echo the full effective configuration.
#[derive(Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    resolved: RefCell<BTreeMap<String, String>>,
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines; `#` starts a comment. A JSON object with a `config` member (a
    /// run manifest) is accepted too, so a run can be repeated from its manifest.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::new();
        if text.trim_start().starts_with('{') {
            let manifest: serde_json::Value = serde_json::from_str(text)?;
            let obj = manifest
                .get("config")
                .and_then(|c| c.as_object())
                .ok_or_else(|| Error::InvalidConfig("manifest has no 'config' object".into()))?;
            for (k, v) in obj {
                let v = v
                    .as_str()
                    .map(str::to_string)
                    .unwrap_or_else(|| v.to_string());
                cfg.set(k, &v)?;
            }
            return Ok(cfg);
        }
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key = value", n + 1))
            })?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !CONFIG_KEYS.iter().any(|(k, _)| *k == key) {
            return Err(Error::InvalidConfig(format!("unknown config key '{key}'")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// The effective configuration: every key read so far, with its value or default.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        self.resolved.borrow().clone()
    }

    fn raw(&self, key: &str, default: &str) -> String {
        let v = self
            .values
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.to_string());
        self.resolved
            .borrow_mut()
            .insert(key.to_string(), v.clone());
        v
    }

    fn bad(key: &str, v: &str) -> Error {
        Error::InvalidConfig(format!("invalid value '{v}' for '{key}'"))
    }

    pub fn string(&self, key: &str, default: &str) -> String {
        self.raw(key, default)
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.raw(key, &format!("{default:?}"));
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Self::bad(key, &v))
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        let v = self.raw(key, &default.to_string());
        v.parse().map_err(|_| Self::bad(key, &v))
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64> {
        let v = self.raw(key, &default.to_string());
        v.parse().map_err(|_| Self::bad(key, &v))
    }

    pub fn f64_list(&self, key: &str, default: &str) -> Result<Vec<f64>> {
        let v = self.raw(key, default);
        let list: Option<Vec<f64>> = v
            .split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect();
        list.filter(|l| !l.is_empty())
            .ok_or_else(|| Self::bad(key, &v))
    }

    pub fn string_list(&self, key: &str, default: &str) -> Vec<String> {
        self.raw(key, default)
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    }

    /// `a..b` (inclusive) as the step sizes `2^-a, …, 2^-b`.
    pub fn exponent_range(&self, key: &str, default: (i32, i32)) -> Result<Vec<f64>> {
        let v = self.raw(key, &format!("{}..{}", default.0, default.1));
        let (a, b) = v.split_once("..").ok_or_else(|| Self::bad(key, &v))?;
        let a: i32 = a.trim().parse().map_err(|_| Self::bad(key, &v))?;
        let b: i32 = b.trim().parse().map_err(|_| Self::bad(key, &v))?;
        if b < a {
            return Err(Self::bad(key, &v));
        }
        Ok((a..=b).map(|k| 2f64.powi(-k)).collect())
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        let list = self.string_list("methods", "naive,adjoint,aca");
        if list.is_empty() {
            return Err(Error::InvalidConfig("method list is empty".into()));
        }
        list.iter().map(|m| m.parse()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_text() {
        let cfg =
            Config::parse("# comment\nrtol = 1e-6\n\nmethods = aca, adjoint # trailing\n").unwrap();
        assert_eq!(cfg.f64("rtol", 1e-3).unwrap(), 1e-6);
        assert_eq!(cfg.f64("atol", 1e-3).unwrap(), 1e-3);
        assert_eq!(cfg.methods().unwrap(), vec![Method::Aca, Method::Adjoint]);
        let resolved = cfg.resolved();
        assert_eq!(resolved["atol"], "0.001");
        assert_eq!(resolved.len(), 3);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Config::parse("nonsense = 1").is_err());
        assert!(Config::parse("rtol 1").is_err());
        let cfg = Config::parse("rtol = fast\nmethods = aca,rk4").unwrap();
        assert!(cfg.f64("rtol", 1.0).is_err());
        assert!(matches!(cfg.methods(), Err(Error::UnknownMethod(_))));
    }

    #[test]
    fn exponent_ranges() {
        let cfg = Config::parse("h_exponents = 1..3").unwrap();
        assert_eq!(
            cfg.exponent_range("h_exponents", (2, 7)).unwrap(),
            vec![0.5, 0.25, 0.125]
        );
        let cfg = Config::parse("h_exponents = 3..1").unwrap();
        assert!(cfg.exponent_range("h_exponents", (2, 7)).is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let cfg =
            Config::parse(r#"{"experiment":"toy-gradient","config":{"rtol":"1e-6","seed":"3"}}"#)
                .unwrap();
        assert_eq!(cfg.f64("rtol", 0.0).unwrap(), 1e-6);
        assert_eq!(cfg.u64("seed", 0).unwrap(), 3);
    }
}
