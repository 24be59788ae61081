use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::Config;
use super::output::{Check, Report, ResultRow};
use crate::analysis::{
    checkpoint_replay, convergence_order, convergence_series, fd_directional, loglog_slope,
    reverse_error_vs_step, FdOracleConfig,
};
use crate::dynamics::{
    fc_dynamics, van_der_pol_dynamics, DifferentiableDynamics, Linear, ThreeBody, FEATURE_DIM,
};
use crate::error::{Error, Result};
use crate::gradients::{gradient_dispatch, terminal_loss_grad, Method, TerminalLoss};
use crate::optimize::{
    fit, MseOptions, OptimizerConfig, Parameterization, ReferenceSystem, TrajectoryDataset,
    REFERENCE_FIXTURE, REFERENCE_G, REFERENCE_MASSES,
};
use crate::solvers::{ButcherTableau, Solver, SolverConfig};
use crate::vector::{ParameterVector, StateVector};

fn solver_from(cfg: &Config, rtol: f64, atol: f64) -> Result<(Solver, String)> {
    let name = cfg.string("tableau", "dopri5");
    let tableau = ButcherTableau::by_name(&name)?;
    let config = SolverConfig::with_tolerances(cfg.f64("rtol", rtol)?, cfg.f64("atol", atol)?);
    config.validate()?;
    let label = tableau.name().to_string();
    Ok((Solver::new(tableau, config), label))
}

fn report(
    experiment: &str,
    cfg: &Config,
    seed: u64,
    rows: Vec<ResultRow>,
    checks: Vec<Check>,
) -> Report {
    Report {
        experiment: experiment.into(),
        rows,
        checks,
        config: cfg.resolved(),
        seed,
    }
}

/// Gradient error against `2 z0 e^{2kT}` on `z' = kz`, `J = z(T)²`, for every method and horizon.
pub fn run_toy_gradient(cfg: &Config) -> Result<Report> {
    const EXP: &str = "toy-gradient";
    let seed = cfg.u64("seed", 0)?;
    let methods = cfg.methods()?;
    let (solver, tab) = solver_from(cfg, 1e-5, 1e-5)?;
    let k = cfg.f64("k", 1.0)?;
    let z0 = cfg.f64("z0", 1.0)?;
    let horizons = cfg.f64_list("horizons", "1,2,3,4,5,6,7,8,9,10")?;
    let dynamics = Linear::new(1, k);
    let (rtol, atol) = (solver.config.rtol, solver.config.atol);

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for &t_end in &horizons {
        let analytic = 2.0 * z0 * (2.0 * k * t_end).exp();
        for &method in &methods {
            let start = Instant::now();
            let result = gradient_dispatch(
                method,
                &dynamics,
                &StateVector::new(vec![z0])?,
                &dynamics.params(),
                0.0,
                t_end,
                &solver,
                &TerminalLoss::SquaredState,
            );
            let row = ResultRow::new(EXP, method.as_str(), &tab, "abs_grad_error", 0.0)
                .tolerances(rtol, atol)
                .setting("T", t_end);
            match result {
                Ok(g) => {
                    let est = g.d_loss_d_z0[0];
                    let err = (est - analytic).abs();
                    errors.push((method, t_end, Some(err)));
                    rows.push(
                        ResultRow { value: err, ..row }
                            .compared(est, analytic)
                            .evals(g.stats.forward_f_evals, g.stats.backward_f_evals)
                            .wall_time(start.elapsed().as_secs_f64()),
                    );
                }
                Err(_) => {
                    errors.push((method, t_end, None));
                    rows.push(row.compared(f64::NAN, analytic).diverged());
                }
            }
        }
    }

    let lookup = |m: Method, t: f64| {
        errors
            .iter()
            .find(|e| e.0 == m && e.1 == t)
            .and_then(|e| e.2)
    };
    let mut checks = Vec::new();
    if methods.contains(&Method::Aca) && methods.contains(&Method::Adjoint) {
        let violations: Vec<String> = horizons
            .iter()
            .filter(
                |&&t| match (lookup(Method::Aca, t), lookup(Method::Adjoint, t)) {
                    (Some(a), Some(b)) => a > b,
                    (Some(_), None) => false,
                    (None, _) => true,
                },
            )
            .map(|t| format!("{t}"))
            .collect();
        checks.push(Check::new(
            "aca_error_not_above_adjoint",
            violations.is_empty(),
            if violations.is_empty() {
                "ACA error <= adjoint error at every horizon".to_string()
            } else {
                format!(
                    "ACA error exceeds adjoint error at T = {}",
                    violations.join(", ")
                )
            },
        ));
    }
    if methods.contains(&Method::Aca) && horizons.contains(&1.0) {
        let analytic = 2.0 * z0 * (2.0 * k).exp();
        let rel = lookup(Method::Aca, 1.0).map(|e| e / analytic.abs());
        checks.push(Check::new(
            "aca_relative_error_at_t1",
            rel.is_some_and(|r| r < 1e-3),
            format!("relative error {rel:?}, threshold 1e-3"),
        ));
    }
    Ok(report(EXP, cfg, seed, rows, checks))
}

fn downsample(times: &[f64], states: &[Vec<f64>], samples: usize) -> Vec<(f64, Vec<f64>)> {
    let n = times.len();
    let stride = n.div_ceil(samples.max(1)).max(1);
    let mut out: Vec<(f64, Vec<f64>)> = (0..n)
        .step_by(stride)
        .map(|i| (times[i], states[i].clone()))
        .collect();
    if out.last().map(|p| p.0) != Some(times[n - 1]) {
        out.push((times[n - 1], states[n - 1].clone()));
    }
    out
}

/// Van der Pol round trip: reverse-time reconstruction from `z(T)` against checkpoint replay,
/// plus the fixed-step RK4 round-trip error series.
pub fn run_vdp_reverse(cfg: &Config) -> Result<Report> {
    const EXP: &str = "vdp-reverse";
    let seed = cfg.u64("seed", 0)?;
    let (solver, tab) = solver_from(cfg, 1e-3, 1e-6)?;
    let (rtol, atol) = (solver.config.rtol, solver.config.atol);
    let t_end = cfg.f64("t_end", 25.0)?;
    let mu = cfg.f64("mu", 0.15)?;
    let y0 = cfg.f64_list("y0", "2,0")?;
    if y0.len() != 2 {
        return Err(Error::InvalidConfig("y0 needs two values".into()));
    }
    let samples = cfg.usize("samples", 200)?;
    let hs = cfg.exponent_range("reverse_h_exponents", (4, 9))?;
    let series_t_end = cfg.f64("reverse_t_end", 25.0)?;
    let vdp = van_der_pol_dynamics(mu);
    let y0_norm = y0.iter().map(|v| v * v).sum::<f64>().sqrt();

    let mut rows = vec![
        ResultRow::new(EXP, "-", &tab, "y1_0", y0[0]),
        ResultRow::new(EXP, "-", &tab, "y2_0", y0[1]),
    ];

    let start = Instant::now();
    let forward = solver.run(&vdp, &y0, &[], 0.0, t_end, true)?;
    let fcache = forward
        .cache
        .as_ref()
        .expect("recording run keeps its cache");
    for (t, z) in downsample(fcache.time_points(), fcache.z_values(), samples) {
        rows.push(
            ResultRow::new(EXP, "forward", &tab, "y1", z[0])
                .tolerances(rtol, atol)
                .setting("t", t),
        );
        rows.push(
            ResultRow::new(EXP, "forward", &tab, "y2", z[1])
                .tolerances(rtol, atol)
                .setting("t", t),
        );
    }
    let reverse = solver.run(&vdp, &forward.z_end, &[], t_end, 0.0, true);
    let reverse_error = match reverse {
        Ok(rev) => {
            let rcache = rev.cache.as_ref().expect("recording run keeps its cache");
            for (t, z) in downsample(rcache.time_points(), rcache.z_values(), samples) {
                rows.push(
                    ResultRow::new(EXP, "adjoint_reverse", &tab, "y1", z[0])
                        .tolerances(rtol, atol)
                        .setting("t", t),
                );
                rows.push(
                    ResultRow::new(EXP, "adjoint_reverse", &tab, "y2", z[1])
                        .tolerances(rtol, atol)
                        .setting("t", t),
                );
            }
            let err = y0
                .iter()
                .zip(&rev.z_end)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            rows.push(
                ResultRow::new(EXP, "adjoint_reverse", &tab, "abs_error", err)
                    .tolerances(rtol, atol)
                    .setting("T", t_end)
                    .evals(forward.f_evals, rev.f_evals)
                    .wall_time(start.elapsed().as_secs_f64()),
            );
            Some(err)
        }
        Err(_) => {
            rows.push(
                ResultRow::new(EXP, "adjoint_reverse", &tab, "abs_error", 0.0)
                    .tolerances(rtol, atol)
                    .setting("T", t_end)
                    .diverged(),
            );
            None
        }
    };

    let start = Instant::now();
    let replay = checkpoint_replay(&vdp, &y0, &[], 0.0, t_end, &solver)?;
    rows.push(
        ResultRow::new(
            EXP,
            "checkpoint_replay",
            &tab,
            "abs_error",
            replay.abs_error,
        )
        .tolerances(rtol, atol)
        .setting("T", t_end)
        .evals(
            replay.cache.total_f_evals(),
            replay.cache.accepted_steps() * solver.tableau.stages(),
        )
        .wall_time(start.elapsed().as_secs_f64()),
    );
    rows.push(
        ResultRow::new(
            EXP,
            "checkpoint_replay",
            &tab,
            "max_step_mismatch",
            replay.max_step_mismatch,
        )
        .tolerances(rtol, atol)
        .setting("T", t_end),
    );

    let rk4 = ButcherTableau::by_name("rk4")?;
    let series = reverse_error_vs_step(&vdp, &y0, &[], 0.0, series_t_end, &rk4, &hs)?;
    for p in &series {
        rows.push(
            ResultRow::new(EXP, "fixed_reverse", "rk4", "abs_error", p.abs_error)
                .setting("h", p.setting),
        );
    }
    let positive = series.iter().all(|p| p.abs_error > 0.0);
    let decreasing = series.windows(2).all(|w| w[1].abs_error < w[0].abs_error);
    let slope = if positive {
        let xs: Vec<f64> = series.iter().map(|p| p.setting).collect();
        let ys: Vec<f64> = series.iter().map(|p| p.abs_error).collect();
        loglog_slope(&xs, &ys).ok()
    } else {
        None
    };
    rows.push(
        ResultRow::new(
            EXP,
            "fixed_reverse",
            "rk4",
            "error_slope",
            slope.unwrap_or(f64::NAN),
        )
        .compared(slope.unwrap_or(f64::NAN), 4.0)
        .setting("T", series_t_end),
    );
    if slope.is_none() {
        let last = rows.pop().expect("row just pushed");
        rows.push(last.diverged());
    }

    let threshold = 1e-3 * y0_norm;
    let checks = vec![
        Check::new(
            "adjoint_reverse_error_visible",
            reverse_error.is_none_or(|e| e > threshold),
            format!("reverse reconstruction error {reverse_error:?} vs threshold {threshold:e} (None: reverse pass diverged)"),
        ),
        Check::new(
            "checkpoint_replay_exact",
            replay.abs_error == 0.0 && replay.max_step_mismatch == 0.0,
            format!("abs error {}, max step mismatch {}", replay.abs_error, replay.max_step_mismatch),
        ),
        Check::new("fixed_reverse_errors_positive", positive, "every fixed-step round-trip error > 0"),
        Check::new("fixed_reverse_errors_decrease", decreasing, "halving h lowers the round-trip error"),
        Check::new(
            "fixed_reverse_slope",
            slope.is_some_and(|s| (3.5..=4.5).contains(&s)),
            format!("RK4 round-trip error slope {slope:?}, expected within [3.5, 4.5]"),
        ),
    ];
    Ok(report(EXP, cfg, seed, rows, checks))
}

/// Fixed-step global error on `z' = z` over `[0, 1]` and the fitted order of each tableau.
pub fn run_convergence(cfg: &Config) -> Result<Report> {
    const EXP: &str = "convergence";
    let seed = cfg.u64("seed", 0)?;
    let names = cfg.string_list("tableau", "euler,rk2,rk4,dopri5");
    let classical = cfg.exponent_range("h_exponents", (2, 7))?;
    let dopri = cfg.exponent_range("dopri5_h_exponents", (2, 6))?;
    let tolerance = cfg.f64("slope_tolerance", 0.3)?;
    let dynamics = Linear::new(1, 1.0);
    let reference = [std::f64::consts::E];

    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for name in &names {
        let tableau = ButcherTableau::by_name(name)?;
        let hs = if tableau.stages() == 7 {
            &dopri
        } else {
            &classical
        };
        let nominal = tableau.solution_order() as f64;
        let series = convergence_series(
            &dynamics,
            &[1.0],
            &[1.0],
            0.0,
            1.0,
            &tableau,
            hs,
            &reference,
        )?;
        for p in &series {
            rows.push(
                ResultRow::new(EXP, "-", tableau.name(), "global_error", p.error)
                    .setting("h", p.h)
                    .evals(p.steps * tableau.stages(), 0),
            );
        }
        let slope = convergence_order(
            &dynamics,
            &[1.0],
            &[1.0],
            0.0,
            1.0,
            &tableau,
            hs,
            &reference,
        );
        let row = ResultRow::new(EXP, "-", tableau.name(), "order_slope", 0.0);
        match &slope {
            Ok(s) => rows.push(ResultRow { value: *s, ..row }.compared(*s, nominal)),
            Err(_) => rows.push(row.compared(f64::NAN, nominal).diverged()),
        }
        checks.push(Check::new(
            &format!("{}_order", tableau.name()),
            slope
                .as_ref()
                .is_ok_and(|s| (s - nominal).abs() <= tolerance),
            match &slope {
                Ok(s) => format!("slope {s:.4}, nominal {nominal}, tolerance {tolerance}"),
                Err(e) => format!("fit failed: {e}"),
            },
        ));
    }
    Ok(report(EXP, cfg, seed, rows, checks))
}

struct GradProblem {
    name: &'static str,
    dynamics: Box<dyn DifferentiableDynamics>,
    z0: StateVector,
    theta: ParameterVector,
    t_end: f64,
    loss: TerminalLoss,
}

fn gradcheck_problems(seed: u64, names: &[String]) -> Result<Vec<GradProblem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let reference = ReferenceSystem::canonical();
    let horizon = 0.1;
    let target = || -> Result<StateVector> {
        let (z, _) = ReferenceSystem::generation_solver().integrate(
            &reference.dynamics,
            &reference.initial_state,
            &reference.masses,
            0.0,
            horizon,
        )?;
        Ok(z)
    };
    for name in names {
        match name.as_str() {
            "linear" => {
                let z0: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
                let lin = Linear::new(3, -0.5);
                out.push(GradProblem {
                    name: "linear",
                    theta: lin.params(),
                    dynamics: Box::new(lin),
                    z0: StateVector::new(z0)?,
                    t_end: 1.0,
                    loss: TerminalLoss::SquaredState,
                });
            }
            "fc" => {
                let fc = fc_dynamics(FEATURE_DIM, crate::dynamics::DEFAULT_HIDDEN)?;
                out.push(GradProblem {
                    name: "fc",
                    theta: fc.init_params(seed),
                    dynamics: Box::new(fc),
                    z0: reference.initial_state.clone(),
                    t_end: horizon,
                    loss: TerminalLoss::MseToTarget(target()?),
                });
            }
            "three_body" => {
                let masses: Vec<f64> = REFERENCE_MASSES
                    .iter()
                    .map(|m| m * rng.random_range(0.9..1.1))
                    .collect();
                out.push(GradProblem {
                    name: "three_body",
                    dynamics: Box::new(ThreeBody::new(REFERENCE_G)),
                    z0: reference.initial_state.clone(),
                    theta: ParameterVector::new(masses)?,
                    t_end: horizon,
                    loss: TerminalLoss::MseToTarget(target()?),
                });
            }
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown gradcheck problem '{other}'"
                )))
            }
        }
    }
    Ok(out)
}

/// Tolerance a method's gradient must meet against the finite-difference oracle.
pub fn gradcheck_threshold(method: Method) -> f64 {
    match method {
        Method::Adjoint => 1e-2,
        Method::Aca | Method::Naive => 1e-3,
    }
}

/// Directional-derivative check of every method against central differences, over joint random
/// directions in `(z0, θ)`.
pub fn run_gradcheck(cfg: &Config) -> Result<Report> {
    const EXP: &str = "gradcheck";
    let seed = cfg.u64("seed", 0)?;
    let methods = cfg.methods()?;
    let (solver, tab) = solver_from(cfg, 1e-7, 1e-7)?;
    let (rtol, atol) = (solver.config.rtol, solver.config.atol);
    let probes = cfg.usize("probes", 100)?;
    let fd_cfg = FdOracleConfig {
        epsilon: cfg.f64("fd_epsilon", 1e-5)?,
    };
    let names = cfg.string_list("problems", "linear,fc,three_body");
    let problems = gradcheck_problems(seed, &names)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));

    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for p in &problems {
        let d = p.z0.dim();
        let dynamics = p.dynamics.as_ref();
        let forward_loss = |x: &[f64]| -> Result<f64> {
            let run = solver.run(dynamics, &x[..d], &x[d..], 0.0, p.t_end, false)?;
            Ok(terminal_loss_grad(&p.loss, &StateVector::new(run.z_end)?)?.0)
        };
        let base: Vec<f64> = p.z0.iter().chain(p.theta.iter()).copied().collect();
        let directions: Vec<Vec<f64>> = (0..probes)
            .map(|_| {
                let v: Vec<f64> = (0..base.len())
                    .map(|_| rng.sample(StandardNormal))
                    .collect();
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.into_iter().map(|x| x / n).collect()
            })
            .collect();
        let fd: Vec<f64> = directions
            .iter()
            .map(|dir| fd_directional(forward_loss, &base, dir, &fd_cfg))
            .collect::<Result<_>>()?;
        let scale = fd.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        for &method in &methods {
            let start = Instant::now();
            let result = gradient_dispatch(
                method, dynamics, &p.z0, &p.theta, 0.0, p.t_end, &solver, &p.loss,
            );
            let metric = format!("{}_max_relative_error", p.name);
            let row = ResultRow::new(EXP, method.as_str(), &tab, &metric, 0.0)
                .tolerances(rtol, atol)
                .setting("probes", probes as f64);
            let threshold = gradcheck_threshold(method);
            match result {
                Ok(g) => {
                    let grad: Vec<f64> = g
                        .d_loss_d_z0
                        .iter()
                        .chain(g.d_loss_d_theta.iter())
                        .copied()
                        .collect();
                    let worst = directions
                        .iter()
                        .zip(&fd)
                        .map(|(dir, f)| {
                            (dir.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>() - f).abs()
                        })
                        .fold(0.0f64, f64::max);
                    let rel = if scale > 0.0 { worst / scale } else { worst };
                    rows.push(
                        ResultRow { value: rel, ..row }
                            .compared(rel, threshold)
                            .evals(g.stats.forward_f_evals, g.stats.backward_f_evals)
                            .wall_time(start.elapsed().as_secs_f64()),
                    );
                    checks.push(Check::new(
                        &format!("{}_{}", p.name, method),
                        rel < threshold,
                        format!("max relative error {rel:.3e}, threshold {threshold:e}"),
                    ));
                }
                Err(e) => {
                    rows.push(row.diverged());
                    checks.push(Check::new(
                        &format!("{}_{}", p.name, method),
                        false,
                        e.to_string(),
                    ));
                }
            }
        }
    }
    Ok(report(EXP, cfg, seed, rows, checks))
}

/// Loads the dataset at `path`, generating and writing the reference trajectory first if the file
/// does not exist.
pub fn load_or_generate_fixture(path: &Path) -> Result<TrajectoryDataset> {
    if path.exists() {
        return TrajectoryDataset::load(path);
    }
    let data = ReferenceSystem::reference_dataset()?;
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    data.save(path)?;
    Ok(data)
}

/// Fits the three-body data with each method: the Newtonian model with unknown masses, or the
/// neural model.
pub fn run_three_body(cfg: &Config) -> Result<Report> {
    const EXP: &str = "three-body";
    let seed = cfg.u64("seed", 0)?;
    let methods = cfg.methods()?;
    let (solver, tab) = solver_from(cfg, 1e-5, 1e-5)?;
    let (rtol, atol) = (solver.config.rtol, solver.config.atol);
    let fixture = cfg.string("fixture", REFERENCE_FIXTURE);
    let model = cfg.string("model", "ode");
    let opt = OptimizerConfig {
        epochs: cfg.usize("epochs", 100)?,
        initial_lr: cfg.f64("lr", 0.1)?,
        decay: cfg.f64("decay", 0.99)?,
        seed,
        ..Default::default()
    };
    let data = load_or_generate_fixture(Path::new(&fixture))?;

    let (dynamics, theta0, parameterization): (
        Box<dyn DifferentiableDynamics>,
        ParameterVector,
        _,
    ) = match model.as_str() {
        "ode" => {
            let scale = cfg.f64("init_scale", 2.0)?;
            let masses = REFERENCE_MASSES.iter().map(|m| m * scale).collect();
            (
                Box::new(ThreeBody::new(REFERENCE_G)),
                ParameterVector::new(masses)?,
                Parameterization::Log,
            )
        }
        "node" => {
            let fc = fc_dynamics(
                FEATURE_DIM,
                cfg.usize("hidden", crate::dynamics::DEFAULT_HIDDEN)?,
            )?;
            let theta = fc.init_params(seed);
            (Box::new(fc), theta, Parameterization::Identity)
        }
        other => return Err(Error::InvalidConfig(format!("unknown model '{other}'"))),
    };

    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &method in &methods {
        let start = Instant::now();
        let est = crate::gradients::GradientEstimator::new(method, solver.clone());
        let base = |metric: &str, v: f64| {
            ResultRow::new(EXP, method.as_str(), &tab, metric, v).tolerances(rtol, atol)
        };
        match fit(
            dynamics.as_ref(),
            &data,
            &theta0,
            &opt,
            &est,
            parameterization,
            MseOptions::default(),
        ) {
            Ok(r) => {
                let secs = start.elapsed().as_secs_f64();
                let s = r.grad_stats;
                rows.push(
                    base("train_mse", r.train_mse)
                        .setting("epochs", opt.epochs as f64)
                        .evals(s.forward_f_evals, s.backward_f_evals)
                        .wall_time(secs),
                );
                rows.push(base("test_mse", r.test_mse).setting("epochs", opt.epochs as f64));
                rows.push(base("initial_loss", r.loss_history[0]).setting("epoch", 0.0));
                let improved = r.train_mse < r.loss_history[0];
                checks.push(Check::new(
                    &format!("{method}_train_loss_decreased"),
                    improved,
                    format!("{:.3e} -> {:.3e}", r.loss_history[0], r.train_mse),
                ));
                if model == "ode" {
                    let mut worst = 0.0f64;
                    for (i, (m, truth)) in r.final_theta.iter().zip(REFERENCE_MASSES).enumerate() {
                        let rel = (m - truth).abs() / truth;
                        worst = worst.max(rel);
                        rows.push(
                            base(&format!("mass_{}_relative_error", i + 1), rel)
                                .compared(*m, truth),
                        );
                    }
                    if method == Method::Aca {
                        checks.push(Check::new(
                            "aca_masses_within_1_percent",
                            worst < 0.01,
                            format!("worst relative mass error {worst:.3e}"),
                        ));
                        checks.push(Check::new(
                            "aca_test_mse_bound",
                            r.test_mse <= 0.003,
                            format!("test MSE {:.3e}, bound 0.003", r.test_mse),
                        ));
                    }
                }
            }
            Err(e) => {
                rows.push(base("test_mse", 0.0).diverged());
                checks.push(Check::new(&format!("{method}_fit"), false, e.to_string()));
            }
        }
    }
    Ok(report(EXP, cfg, seed, rows, checks))
}
