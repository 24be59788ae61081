//! One-step map, error norm, step-size controller and initial step selection.
//!
//! The arithmetic kernels here are shared with the gradient tapes, so a step recomputed during
//! a backward pass reproduces the forward value bit for bit.

use super::{ButcherTableau, Solver, SolverConfig};
use crate::dynamics::OdeSystem;
use crate::error::{Error, Result};

/// Result of one trial step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub z_new: Vec<f64>,
    /// Scaled RMS error estimate; zero for tableaux without an embedded estimator.
    pub err_norm: f64,
    /// Stage derivatives `k_1 … k_s`.
    pub stages: Vec<Vec<f64>>,
    /// Dynamics evaluations spent on this step.
    pub f_evals: usize,
}

#[inline]
pub(crate) fn stage_time(t: f64, c: f64, h: f64) -> f64 {
    t + c * h
}

/// `sum = Σ_j coefs[j]·ks[j]` (zero coefficients skipped), `out = base + h·sum`.
pub(crate) fn combine(
    base: &[f64],
    h: f64,
    coefs: &[f64],
    ks: &[Vec<f64>],
    sum: &mut [f64],
    out: &mut [f64],
) {
    for i in 0..base.len() {
        let mut acc = 0.0;
        for (c, k) in coefs.iter().zip(ks) {
            if *c != 0.0 {
                acc += c * k[i];
            }
        }
        sum[i] = acc;
        out[i] = base[i] + h * acc;
    }
}

/// `out = h·Σ_j weights[j]·ks[j]`, the embedded error estimate; `sum` receives the inner sum.
pub(crate) fn error_vector(
    h: f64,
    weights: &[f64],
    ks: &[Vec<f64>],
    sum: &mut [f64],
    out: &mut [f64],
) {
    for i in 0..out.len() {
        let mut acc = 0.0;
        for (c, k) in weights.iter().zip(ks) {
            if *c != 0.0 {
                acc += c * k[i];
            }
        }
        sum[i] = acc;
        out[i] = h * acc;
    }
}

/// Root-mean-square of `err[i] / (atol + rtol·max(|z_old[i]|, |z_new[i]|))`.
///
/// A value at most one means the step meets the tolerance.
pub fn error_norm(err: &[f64], z_old: &[f64], z_new: &[f64], atol: f64, rtol: f64) -> f64 {
    assert_eq!(err.len(), z_old.len());
    assert_eq!(err.len(), z_new.len());
    let n = err.len();
    if n == 0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let scale = atol + rtol * z_old[i].abs().max(z_new[i].abs());
        let r = err[i] / scale;
        acc += r * r;
    }
    (acc / n as f64).sqrt()
}

/// Adds the cotangent of [`error_norm`] (seeded with `g`) into `g_err`, `g_old` and `g_new`.
pub(crate) fn error_norm_vjp(
    err: &[f64],
    z_old: &[f64],
    z_new: &[f64],
    atol: f64,
    rtol: f64,
    norm: f64,
    g: f64,
    g_err: &mut [f64],
    g_old: &mut [f64],
    g_new: &mut [f64],
) {
    let n = err.len();
    if norm == 0.0 || n == 0 {
        // sqrt is not differentiable at zero; every error component vanishes there.
        return;
    }
    // d norm / d r_i = r_i / (n · norm) with r_i = err_i / scale_i.
    let coef = g / (n as f64 * norm);
    for i in 0..n {
        let (ao, an) = (z_old[i].abs(), z_new[i].abs());
        let scale = atol + rtol * ao.max(an);
        let r = err[i] / scale;
        let dr = coef * r;
        g_err[i] += dr / scale;
        let d_scale = -dr * r / scale;
        if an > ao {
            g_new[i] += d_scale * rtol * z_new[i].signum();
        } else {
            g_old[i] += d_scale * rtol * z_old[i].signum();
        }
    }
}

/// Multiplicative step-size factor `clamp(safety·err^(−1/(p+1)), min_factor, max_factor)` and its
/// derivative with respect to `err`. At a clamp the derivative is zero.
pub(crate) fn controller_factor(err_norm: f64, order_p: u32, cfg: &SolverConfig) -> (f64, f64) {
    if err_norm == 0.0 {
        return (cfg.max_factor, 0.0);
    }
    let expo = -1.0 / (order_p as f64 + 1.0);
    let raw = cfg.safety * err_norm.powf(expo);
    if raw <= cfg.min_factor {
        (cfg.min_factor, 0.0)
    } else if raw >= cfg.max_factor {
        (cfg.max_factor, 0.0)
    } else {
        (raw, expo * raw / err_norm)
    }
}

/// Next step size from the current error estimate.
///
/// Fails with `StepUnderflow` when the result is smaller than `cfg.h_min` (zero when unset).
pub fn propose_step(err_norm: f64, h: f64, order_p: u32, cfg: &SolverConfig) -> Result<f64> {
    let (factor, _) = controller_factor(err_norm, order_p, cfg);
    let h_new = h * factor;
    let h_min = cfg.h_min.unwrap_or(0.0);
    if !(h_new.abs() >= h_min) || h_new == 0.0 {
        return Err(Error::StepUnderflow {
            t: f64::NAN,
            h: h_new,
            h_min,
        });
    }
    Ok(h_new)
}

fn scaled_rms(v: &[f64], scale: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.iter()
        .zip(scale)
        .map(|(x, s)| (x / s).powi(2))
        .sum::<f64>()
        / v.len() as f64)
        .sqrt()
}

/// Initial step magnitude and the number of dynamics evaluations spent finding it.
pub(crate) fn initial_step_counted<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    z0: &[f64],
    theta: &[f64],
    t1: f64,
    order_p: u32,
    cfg: &SolverConfig,
) -> Result<(f64, usize)> {
    let span = (t1 - t0).abs();
    let h_min = cfg.h_min_for(t1 - t0);
    if let Some(h) = cfg.h_init {
        return Ok((h.min(span), 0));
    }
    let dir = (t1 - t0).signum();
    let n = z0.len();
    let scale: Vec<f64> = z0.iter().map(|z| cfg.atol + cfg.rtol * z.abs()).collect();
    let mut f0 = vec![0.0; n];
    sys.eval(t0, z0, theta, &mut f0)?;
    let d0 = scaled_rms(z0, &scale);
    let d1 = scaled_rms(&f0, &scale);
    if d1 == 0.0 {
        return Ok((span, 1));
    }
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
    .min(span);
    let z1: Vec<f64> = z0.iter().zip(&f0).map(|(z, f)| z + dir * h0 * f).collect();
    let mut f1 = vec![0.0; n];
    sys.eval(t0 + dir * h0, &z1, theta, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(&f0).map(|(a, b)| a - b).collect();
    let d2 = scaled_rms(&diff, &scale) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(1.0 / (order_p as f64 + 1.0))
    };
    let h = (100.0 * h0).min(h1).min(span);
    let h = if h > h_min { h } else { h_min.min(span) };
    if !h.is_finite() {
        return Err(Error::NonFiniteState { t: t0 });
    }
    Ok((h, 2))
}

/// Standard two-evaluation starting-step heuristic, clamped to `(h_min, |t1 − t0|]`.
///
/// Returns a magnitude; the integrator applies the direction of integration. An explicit
/// `cfg.h_init` is returned unchanged (capped at the interval length).
pub fn initial_step<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    z0: &[f64],
    theta: &[f64],
    t1: f64,
    order_p: u32,
    cfg: &SolverConfig,
) -> Result<f64> {
    initial_step_counted(sys, t0, z0, theta, t1, order_p, cfg).map(|(h, _)| h)
}

pub(crate) fn ensure_finite(v: &[f64], t: f64) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { t })
    }
}

impl Solver {
    /// Applies the one-step map from `(t, z)` with step `h` (negative steps run backwards).
    ///
    /// `first_stage` supplies a precomputed `k_1 = f(t, z)`, as FSAL reuse does.
    pub fn step<S: OdeSystem + ?Sized>(
        &self,
        sys: &S,
        t: f64,
        z: &[f64],
        theta: &[f64],
        h: f64,
        first_stage: Option<&[f64]>,
    ) -> Result<StepOutcome> {
        step_with(
            &self.tableau,
            &self.config,
            sys,
            t,
            z,
            theta,
            h,
            first_stage,
        )
    }
}

pub(crate) fn step_with<S: OdeSystem + ?Sized>(
    tab: &ButcherTableau,
    cfg: &SolverConfig,
    sys: &S,
    t: f64,
    z: &[f64],
    theta: &[f64],
    h: f64,
    first_stage: Option<&[f64]>,
) -> Result<StepOutcome> {
    let n = z.len();
    let s = tab.stages();
    let mut stages: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut f_evals = 0;
    match first_stage {
        Some(k) => stages.push(k.to_vec()),
        None => {
            let mut k = vec![0.0; n];
            sys.eval(t, z, theta, &mut k)?;
            ensure_finite(&k, t)?;
            f_evals += 1;
            stages.push(k);
        }
    }
    let explicit_stages = if tab.fsal() { s - 1 } else { s };
    let mut sum = vec![0.0; n];
    let mut arg = vec![0.0; n];
    for i in 1..explicit_stages {
        combine(z, h, tab.a(i), &stages, &mut sum, &mut arg);
        let ti = stage_time(t, tab.c()[i], h);
        let mut k = vec![0.0; n];
        sys.eval(ti, &arg, theta, &mut k)?;
        ensure_finite(&k, ti)?;
        f_evals += 1;
        stages.push(k);
    }
    let mut z_new = vec![0.0; n];
    combine(z, h, tab.b(), &stages, &mut sum, &mut z_new);
    ensure_finite(&z_new, t + h)?;
    if tab.fsal() {
        let ti = stage_time(t, tab.c()[s - 1], h);
        let mut k = vec![0.0; n];
        sys.eval(ti, &z_new, theta, &mut k)?;
        ensure_finite(&k, ti)?;
        f_evals += 1;
        stages.push(k);
    }
    let err_norm = match tab.error_weights() {
        Some(w) => {
            let mut err = vec![0.0; n];
            error_vector(h, w, &stages, &mut sum, &mut err);
            error_norm(&err, z, &z_new, cfg.atol, cfg.rtol)
        }
        None => 0.0,
    };
    Ok(StepOutcome {
        z_new,
        err_norm,
        stages,
        f_evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{linear_dynamics, Constant};
    use crate::solvers::{dormand_prince_45, euler, rk4};

    #[test]
    fn zero_dynamics_leave_state_unchanged() {
        let sys = Constant::zero(2);
        for tab in ButcherTableau::catalog() {
            let solver = Solver::new(tab, SolverConfig::default());
            let out = solver
                .step(&sys, 0.0, &[1.0, -2.0], &[], 0.37, None)
                .unwrap();
            assert_eq!(out.z_new, vec![1.0, -2.0]);
            assert_eq!(out.err_norm, 0.0);
        }
    }

    #[test]
    fn euler_step() {
        let solver = Solver::new(euler(), SolverConfig::default());
        let out = solver
            .step(&linear_dynamics(1.0), 0.0, &[1.0], &[1.0], 0.1, None)
            .unwrap();
        assert_eq!(out.z_new, vec![1.1]);
        assert_eq!(out.f_evals, 1);
    }

    #[test]
    fn dopri5_step_matches_exponential() {
        let solver = Solver::new(dormand_prince_45(), SolverConfig::default());
        let out = solver
            .step(&linear_dynamics(1.0), 0.0, &[1.0], &[1.0], 0.1, None)
            .unwrap();
        assert!((out.z_new[0] - 1.1051709180756477).abs() < 1e-9);
        assert_eq!(out.stages.len(), 7);
        assert_eq!(out.f_evals, 7);
        let reuse = solver
            .step(
                &linear_dynamics(1.0),
                0.0,
                &[1.0],
                &[1.0],
                0.1,
                Some(&[1.0]),
            )
            .unwrap();
        assert_eq!(reuse.f_evals, 6);
        assert_eq!(reuse.z_new, out.z_new);
    }

    #[test]
    fn rk4_step_is_quartic_taylor_polynomial() {
        let solver = Solver::new(rk4(), SolverConfig::default());
        let out = solver
            .step(&linear_dynamics(1.0), 0.0, &[1.0], &[1.0], 0.1, None)
            .unwrap();
        let h: f64 = 0.1;
        let taylor = 1.0 + h + h * h / 2.0 + h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert!((out.z_new[0] - taylor).abs() < 1e-15);
        assert!((out.z_new[0] - 1.1051708333333).abs() < 1e-12);
    }

    #[test]
    fn error_norm_examples() {
        assert_eq!(
            error_norm(&[0.0, 0.0], &[1.0, 2.0], &[1.0, 2.0], 1e-3, 1e-3),
            0.0
        );
        assert_eq!(error_norm(&[0.001], &[0.0], &[0.0], 1e-3, 1e-3), 1.0);
        let e1 = error_norm(&[0.3, -0.1], &[1.0, 0.5], &[1.2, 0.4], 1e-2, 1e-1);
        let e2 = error_norm(&[0.6, -0.2], &[1.0, 0.5], &[1.2, 0.4], 1e-2, 1e-1);
        assert!((e2 - 2.0 * e1).abs() < 1e-15);
    }

    #[test]
    fn error_norm_vjp_matches_finite_differences() {
        let err = [0.3, -0.1, 0.05];
        let zo = [1.0, -0.5, 0.2];
        let zn = [1.2, -0.4, -0.3];
        let (atol, rtol) = (1e-2, 1e-1);
        let norm = error_norm(&err, &zo, &zn, atol, rtol);
        let (mut ge, mut go, mut gn) = ([0.0; 3], [0.0; 3], [0.0; 3]);
        error_norm_vjp(
            &err, &zo, &zn, atol, rtol, norm, 1.0, &mut ge, &mut go, &mut gn,
        );
        let eps = 1e-7;
        for i in 0..3 {
            for (which, g) in [(0, ge[i]), (1, go[i]), (2, gn[i])] {
                let mut v = [err, zo, zn];
                v[which][i] += eps;
                let p = error_norm(&v[0], &v[1], &v[2], atol, rtol);
                v[which][i] -= 2.0 * eps;
                let m = error_norm(&v[0], &v[1], &v[2], atol, rtol);
                assert!(((p - m) / (2.0 * eps) - g).abs() < 1e-6, "{which} {i}");
            }
        }
    }

    #[test]
    fn controller_examples() {
        let cfg = SolverConfig::default();
        assert!((propose_step(1.0, 0.2, 4, &cfg).unwrap() - 0.18).abs() < 1e-15);
        assert_eq!(propose_step(0.0, 0.2, 4, &cfg).unwrap(), 2.0);
        let h = propose_step(2f64.powi(5), 1.0, 4, &cfg).unwrap();
        assert!((h - 0.45).abs() < 1e-15);
        // Reverse-time steps keep their sign.
        assert!((propose_step(1.0, -0.2, 4, &cfg).unwrap() + 0.18).abs() < 1e-15);
        let strict = SolverConfig {
            h_min: Some(1e-3),
            ..cfg
        };
        assert!(matches!(
            propose_step(1e6, 1e-3, 4, &strict),
            Err(Error::StepUnderflow { .. })
        ));
    }

    #[test]
    fn controller_derivative_matches_finite_differences() {
        let cfg = SolverConfig::default();
        for err in [0.3, 0.9, 2.0, 10.0] {
            let (_, d) = controller_factor(err, 4, &cfg);
            let eps = 1e-7;
            let fd = (controller_factor(err + eps, 4, &cfg).0
                - controller_factor(err - eps, 4, &cfg).0)
                / (2.0 * eps);
            assert!((fd - d).abs() < 1e-6);
        }
        assert_eq!(controller_factor(1e-30, 4, &cfg), (cfg.max_factor, 0.0));
    }

    #[test]
    fn initial_step_heuristic() {
        let zero = Constant::zero(1);
        let cfg = SolverConfig::with_tolerances(1e-5, 1e-5);
        assert_eq!(
            initial_step(&zero, 0.0, &[1.0], &[], 2.5, 4, &cfg).unwrap(),
            2.5
        );
        let h = initial_step(&linear_dynamics(1.0), 0.0, &[1.0], &[1.0], 1.0, 4, &cfg).unwrap();
        assert!(h > 0.0 && h < 1.0, "{h}");
        // Hand evaluation: h0 = 0.01, d2 ≈ 5e4·1.0, h1 = (0.01/5.0e4)^(1/5).
        let expected = (0.01f64 / (0.01 / 0.01 / 2e-5 * 1.0)).powf(0.2);
        assert!((h - expected).abs() / expected < 1e-3, "{h} vs {expected}");
        let fixed = SolverConfig {
            h_init: Some(0.0123),
            ..cfg
        };
        assert_eq!(
            initial_step(&linear_dynamics(1.0), 0.0, &[1.0], &[1.0], 1.0, 4, &fixed).unwrap(),
            0.0123
        );
    }
}
