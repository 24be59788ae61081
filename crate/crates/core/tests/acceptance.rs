//! End-to-end acceptance criteria. Runs without the libtest harness so every criterion prints
//! exactly one PASS/FAIL line; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use aca_ode::dynamics::{linear_dynamics, van_der_pol_dynamics, Linear};
use aca_ode::error::Result;
use aca_ode::gradients::{
    adjoint_with_trace, grad_aca, grad_naive, gradient_dispatch, Method, TerminalLoss,
};
use aca_ode::harness::{
    run_convergence, run_gradcheck, run_three_body, run_toy_gradient, run_vdp_reverse, Config,
    Report,
};
use aca_ode::solvers::{euler, Solver};
use aca_ode::vector::{ParameterVector, StateVector};

type Outcome = Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Outcome);

fn config(pairs: &[(&str, &str)]) -> Result<Config> {
    let mut cfg = Config::new();
    for (k, v) in pairs {
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

fn summarise(report: &Report, only: Option<&[&str]>) -> (bool, String) {
    let relevant: Vec<_> = report
        .checks
        .iter()
        .filter(|c| only.is_none_or(|names| names.contains(&c.name.as_str())))
        .collect();
    let passed = !relevant.is_empty() && relevant.iter().all(|c| c.passed);
    let detail = relevant
        .iter()
        .map(|c| {
            format!(
                "{}={} ({})",
                c.name,
                if c.passed { "ok" } else { "FAIL" },
                c.detail
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    (passed, detail)
}

fn toy_gradient() -> Outcome {
    let cfg = config(&[
        ("tableau", "dopri5"),
        ("rtol", "1e-5"),
        ("atol", "1e-5"),
        ("horizons", "1,2,3,4,5,6,7,8,9,10"),
    ])?;
    Ok(summarise(&run_toy_gradient(&cfg)?, None))
}

fn gradcheck() -> Outcome {
    let cfg = config(&[
        ("rtol", "1e-7"),
        ("atol", "1e-7"),
        ("probes", "100"),
        ("problems", "linear,fc,three_body"),
    ])?;
    Ok(summarise(&run_gradcheck(&cfg)?, None))
}

fn convergence() -> Outcome {
    let cfg = config(&[
        ("tableau", "euler,rk2,rk4,dopri5"),
        ("slope_tolerance", "0.3"),
    ])?;
    Ok(summarise(&run_convergence(&cfg)?, None))
}

fn vdp_reverse() -> Outcome {
    Ok(summarise(&run_vdp_reverse(&Config::new())?, None))
}

fn three_body() -> Outcome {
    let cfg = config(&[
        ("methods", "aca"),
        ("epochs", "100"),
        ("lr", "0.1"),
        ("decay", "0.99"),
    ])?;
    let report = run_three_body(&cfg)?;
    Ok(summarise(
        &report,
        Some(&["aca_masses_within_1_percent", "aca_test_mse_bound"]),
    ))
}

fn cost_structure() -> Outcome {
    let vdp = van_der_pol_dynamics(0.15);
    let solver = Solver::dopri5(1e-6);
    let z0 = StateVector::new(vec![2.0, 0.0])?;
    let theta = ParameterVector::new(vec![])?;
    let run = |m| {
        gradient_dispatch(
            m,
            &vdp,
            &z0,
            &theta,
            0.0,
            10.0,
            &solver,
            &TerminalLoss::SquaredState,
        )
    };
    let (aca, naive, adj) = (
        run(Method::Aca)?.stats,
        run(Method::Naive)?.stats,
        run(Method::Adjoint)?.stats,
    );
    let stages = solver.tableau.stages();
    let ok = aca.reverse_rejected == 0
        && aca.backward_f_evals == aca.forward_accepted * stages
        && naive.forward_rejected > 0
        && naive.peak_tape_nodes > aca.peak_tape_nodes
        && adj.reverse_accepted > 0;
    Ok((
        ok,
        format!(
            "aca backward evals {} = {}x{}, aca reverse rejections {}, forward rejections {}, \
             naive nodes {} vs aca {}, adjoint reverse steps {}",
            aca.backward_f_evals,
            aca.forward_accepted,
            stages,
            aca.reverse_rejected,
            naive.forward_rejected,
            naive.peak_tape_nodes,
            aca.peak_tape_nodes,
            adj.reverse_accepted
        ),
    ))
}

fn costate() -> Outcome {
    let (k, t_end) = (0.8, 2.0);
    let solver = Solver::dopri5(1e-10);
    let trace = adjoint_with_trace(
        &linear_dynamics(k),
        &StateVector::new(vec![1.0])?,
        &ParameterVector::new(vec![k])?,
        0.0,
        t_end,
        &solver,
        &solver,
        &TerminalLoss::SquaredState,
    )?;
    let cache = &trace.reverse_caches[0];
    let lambda_t = cache.z_values()[0][1];
    let worst = cache
        .time_points()
        .iter()
        .zip(cache.z_values())
        .map(|(t, y)| (y[1] - lambda_t * (k * (t_end - t)).exp()).abs())
        .fold(0.0f64, f64::max);
    Ok((
        worst < 1e-4,
        format!(
            "max |λ(t) − λ(T)e^(k(T−t))| = {worst:.3e} over {} points",
            cache.time_points().len()
        ),
    ))
}

fn fixed_step_equivalence() -> Outcome {
    let solver = Solver::fixed(euler(), 100);
    let vdp = van_der_pol_dynamics(0.15);
    let z0 = StateVector::new(vec![2.0, 0.0])?;
    let none = ParameterVector::new(vec![])?;
    let loss = TerminalLoss::MseToTarget(StateVector::new(vec![0.5, -1.0])?);
    let a = grad_aca(&vdp, &z0, &none, 0.0, 3.0, &solver, &loss)?;
    let n = grad_naive(&vdp, &z0, &none, 0.0, 3.0, &solver, &loss)?;
    let mut mismatches = a
        .d_loss_d_z0
        .iter()
        .zip(n.d_loss_d_z0.iter())
        .filter(|(x, y)| x.to_bits() != y.to_bits())
        .count();

    let lin = Linear::new(3, -0.7);
    let z0 = StateVector::new(vec![1.0, -0.5, 0.25])?;
    let a = grad_aca(
        &lin,
        &z0,
        &lin.params(),
        0.0,
        1.3,
        &solver,
        &TerminalLoss::SquaredState,
    )?;
    let n = grad_naive(
        &lin,
        &z0,
        &lin.params(),
        0.0,
        1.3,
        &solver,
        &TerminalLoss::SquaredState,
    )?;
    let ga = a.d_loss_d_z0.iter().chain(a.d_loss_d_theta.iter());
    let gn = n.d_loss_d_z0.iter().chain(n.d_loss_d_theta.iter());
    mismatches += ga
        .zip(gn)
        .filter(|(x, y)| x.to_bits() != y.to_bits())
        .count();
    Ok((
        mismatches == 0,
        format!("{mismatches} gradient components differ bitwise (van der Pol and linear, 100 Euler steps)"),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("toy gradient accuracy", toy_gradient),
        ("gradient check suite", gradcheck),
        ("convergence orders", convergence),
        ("van der Pol reversibility", vdp_reverse),
        ("three-body mass recovery", three_body),
        ("cost structure", cost_structure),
        ("adjoint costate closed form", costate),
        ("fixed-step naive/ACA equivalence", fixed_step_equivalence),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        failures += usize::from(!passed);
        println!(
            "criterion {} {name}: {} [{:.1}s] {detail}",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
