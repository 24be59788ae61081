//! Experiment runner behind the `aca-harness` binary: each experiment reads a flat key/value
//! [`Config`], produces long-format [`ResultRow`]s plus named pass/fail [`Check`]s, and is
//! written as CSV with a one-line JSON manifest.

mod config;
mod experiments;
mod output;

use std::fmt;
use std::str::FromStr;

pub use config::{Config, CONFIG_KEYS};
pub use experiments::{
    gradcheck_threshold, load_or_generate_fixture, run_convergence, run_gradcheck, run_three_body,
    run_toy_gradient, run_vdp_reverse,
};
pub use output::{
    manifest_path, validate_results, write_report, Check, Manifest, Report, ResultRow, CSV_COLUMNS,
    SCHEMA_VERSION,
};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    ToyGradient,
    VdpReverse,
    Convergence,
    Gradcheck,
    ThreeBody,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::ToyGradient,
        Experiment::VdpReverse,
        Experiment::Convergence,
        Experiment::Gradcheck,
        Experiment::ThreeBody,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::ToyGradient => "toy-gradient",
            Experiment::VdpReverse => "vdp-reverse",
            Experiment::Convergence => "convergence",
            Experiment::Gradcheck => "gradcheck",
            Experiment::ThreeBody => "three-body",
        }
    }

    pub fn run(self, cfg: &Config) -> Result<Report> {
        match self {
            Experiment::ToyGradient => run_toy_gradient(cfg),
            Experiment::VdpReverse => run_vdp_reverse(cfg),
            Experiment::Convergence => run_convergence(cfg),
            Experiment::Gradcheck => run_gradcheck(cfg),
            Experiment::ThreeBody => run_three_body(cfg),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == key || (key == "three-body-fit" && *e == Experiment::ThreeBody))
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}
