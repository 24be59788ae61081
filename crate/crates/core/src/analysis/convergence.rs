use crate::dynamics::OdeSystem;
use crate::error::{Error, Result};
use crate::solvers::{ButcherTableau, Solver};

/// Global error of one fixed-step run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergencePoint {
    pub h: f64,
    pub steps: usize,
    pub error: f64,
}

/// Errors below this multiple of machine precision (relative to the reference) are roundoff.
const ROUNDOFF_FLOOR: f64 = 64.0 * f64::EPSILON;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fixed-step global error at `T` for every step size. `h` is rounded to the nearest step count
/// dividing `[t0, T]`; the reported `h` is the one actually used.
#[allow(clippy::too_many_arguments)]
pub fn convergence_series<S: OdeSystem + ?Sized>(
    dynamics: &S,
    z0: &[f64],
    theta: &[f64],
    t0: f64,
    t_end: f64,
    tableau: &ButcherTableau,
    h_list: &[f64],
    reference: &[f64],
) -> Result<Vec<ConvergencePoint>> {
    let span = (t_end - t0).abs();
    h_list
        .iter()
        .map(|&h| {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "step size must be positive, got {h}"
                )));
            }
            let steps = ((span / h).round() as usize).max(1);
            let run =
                Solver::fixed(tableau.clone(), steps).run(dynamics, z0, theta, t0, t_end, false)?;
            let diff: Vec<f64> = run
                .z_end
                .iter()
                .zip(reference)
                .map(|(a, b)| a - b)
                .collect();
            Ok(ConvergencePoint {
                h: span / steps as f64,
                steps,
                error: norm(&diff),
            })
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidConfig(
            "slope fit needs at least two paired points".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if slope.is_finite() {
        Ok(slope)
    } else {
        Err(Error::InvalidConfig("slope fit is singular".into()))
    }
}

/// Empirical order of accuracy: the slope of `log‖z_h(T) − reference‖` against `log h`.
#[allow(clippy::too_many_arguments)]
pub fn convergence_order<S: OdeSystem + ?Sized>(
    dynamics: &S,
    z0: &[f64],
    theta: &[f64],
    t0: f64,
    t_end: f64,
    tableau: &ButcherTableau,
    h_list: &[f64],
    reference: &[f64],
) -> Result<f64> {
    if h_list.len() < 4 {
        return Err(Error::InvalidConfig(
            "convergence fit needs at least four step sizes".into(),
        ));
    }
    let series = convergence_series(dynamics, z0, theta, t0, t_end, tableau, h_list, reference)?;
    let floor = ROUNDOFF_FLOOR * norm(reference).max(1.0);
    if let Some(p) = series.iter().find(|p| !(p.error > floor)) {
        return Err(Error::DegenerateFit {
            h: p.h,
            error: p.error,
        });
    }
    let hs: Vec<f64> = series.iter().map(|p| p.h).collect();
    let es: Vec<f64> = series.iter().map(|p| p.error).collect();
    loglog_slope(&hs, &es)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{linear_dynamics, Constant};
    use crate::solvers::{euler, rk2_heun, rk4};
    use std::f64::consts::E;

    fn hs(from: i32, to: i32) -> Vec<f64> {
        (from..=to).map(|k| 2f64.powi(-k)).collect()
    }

    #[test]
    fn classical_orders_on_exponential_growth() {
        let lin = linear_dynamics(1.0);
        for (tab, order) in [(euler(), 1.0), (rk2_heun(), 2.0), (rk4(), 4.0)] {
            let p =
                convergence_order(&lin, &[1.0], &[1.0], 0.0, 1.0, &tab, &hs(2, 7), &[E]).unwrap();
            assert!((p - order).abs() < 0.3, "{}: {p}", tab.name());
        }
    }

    #[test]
    fn exact_method_is_degenerate() {
        let c = Constant::new(vec![0.5]);
        let err =
            convergence_order(&c, &[1.0], &[], 0.0, 1.0, &rk4(), &hs(1, 4), &[1.5]).unwrap_err();
        assert!(matches!(err, Error::DegenerateFit { .. }));
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 0.5, 0.25, 0.125];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(3)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_step_sizes() {
        let lin = linear_dynamics(1.0);
        assert!(
            convergence_order(&lin, &[1.0], &[1.0], 0.0, 1.0, &euler(), &hs(1, 3), &[E]).is_err()
        );
    }
}
