//! Empirical order of each built-in tableau on `z' = z` over [0, 1].

use aca_ode::analysis::{convergence_order, convergence_series};
use aca_ode::dynamics::Linear;
use aca_ode::error::Result;
use aca_ode::solvers::{
    bogacki_shampine_23, dormand_prince_45, euler, heun_euler_12, rk2_heun, rk4,
};

fn main() -> Result<()> {
    let f = Linear::new(1, 1.0);
    let exact = [std::f64::consts::E];
    let hs: Vec<f64> = (2..=7).map(|k| 2f64.powi(-k)).collect();

    for tableau in [
        euler(),
        rk2_heun(),
        heun_euler_12(),
        bogacki_shampine_23(),
        rk4(),
        dormand_prince_45(),
    ] {
        // High-order methods reach round-off quickly; stop the sweep earlier for them.
        let h = if tableau.solution_order() >= 5 {
            &hs[..5]
        } else {
            &hs[..]
        };
        let series = convergence_series(&f, &[1.0], &[1.0], 0.0, 1.0, &tableau, h, &exact)?;
        let slope = convergence_order(&f, &[1.0], &[1.0], 0.0, 1.0, &tableau, h, &exact)?;
        let errs: Vec<String> = series.iter().map(|p| format!("{:.1e}", p.error)).collect();
        println!(
            "{:>8}  order {}  slope {slope:5.2}  [{}]",
            tableau.name(),
            tableau.solution_order(),
            errs.join(", ")
        );
    }
    Ok(())
}
