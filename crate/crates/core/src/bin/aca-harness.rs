use std::path::PathBuf;
use std::process::ExitCode;

use aca_ode::error::Result;
use aca_ode::harness::{manifest_path, validate_results, write_report, Config, Experiment};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "aca-harness",
    version,
    about = "Run gradient-estimator experiments and write CSV results"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gradient error on z' = kz against the closed form, per method and horizon
    ToyGradient(Common),
    /// Van der Pol reverse-time reconstruction versus checkpoint replay
    VdpReverse(Common),
    /// Empirical convergence order of each tableau
    Convergence(Common),
    /// Directional finite-difference check of every gradient method
    Gradcheck(Common),
    /// Fit three-body masses (or a neural model) to the reference trajectory
    ThreeBody(Common),
    /// Check results CSVs and their manifests against the output schema
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// key=value file, or a previous run's manifest
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of naive, adjoint, aca
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    tableau: Option<String>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    /// Override any other config key
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn config(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::new(),
        };
        let flags = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("methods", self.method.clone()),
            ("tableau", self.tableau.clone()),
            ("rtol", self.rtol.map(|v| format!("{v:?}"))),
            ("atol", self.atol.map(|v| format!("{v:?}"))),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        for kv in &self.overrides {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                aca_ode::error::Error::InvalidConfig(format!("expected KEY=VALUE, got '{kv}'"))
            })?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }
}

fn run(experiment: Experiment, common: &Common) -> Result<bool> {
    let cfg = common.config()?;
    let report = experiment.run(&cfg)?;
    let csv = write_report(&report, &common.out)?;
    for check in &report.checks {
        let mark = if check.passed { "PASS" } else { "FAIL" };
        eprintln!("{mark} {}: {}", check.name, check.detail);
    }
    eprintln!("wrote {} ({} rows)", csv.display(), report.rows.len());
    println!(
        "{}",
        std::fs::read_to_string(manifest_path(&csv))?.trim_end()
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::ToyGradient(c) => run(Experiment::ToyGradient, c),
        Command::VdpReverse(c) => run(Experiment::VdpReverse, c),
        Command::Convergence(c) => run(Experiment::Convergence, c),
        Command::Gradcheck(c) => run(Experiment::Gradcheck, c),
        Command::ThreeBody(c) => run(Experiment::ThreeBody, c),
        Command::Validate { files } => files.iter().try_fold(true, |ok, f| {
            let rows = validate_results(f)?;
            eprintln!("ok {} ({rows} rows)", f.display());
            Ok(ok)
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
