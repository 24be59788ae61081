//! Butcher tableaux for explicit Runge–Kutta methods.

use crate::error::{Error, Result};

/// Coefficients of an explicit Runge–Kutta method, optionally with an embedded error estimator.
///
/// `a` is strictly lower triangular and stored row by row: row `i` has `i` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ButcherTableau {
    name: &'static str,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    b_hat: Option<Vec<f64>>,
    c: Vec<f64>,
    /// Order used by the step-size controller (the lower order of an embedded pair).
    order_p: u32,
    /// Order of the propagated solution `b`.
    solution_order: u32,
    fsal: bool,
    /// `b − b_hat`, cached for the error estimate.
    error_weights: Option<Vec<f64>>,
}

impl ButcherTableau {
    /// Builds and validates a tableau. `fsal` is detected from the coefficients.
    pub fn new(
        name: &'static str,
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        b_hat: Option<Vec<f64>>,
        c: Vec<f64>,
        order_p: u32,
        solution_order: u32,
    ) -> Result<Self> {
        let s = b.len();
        let invalid = |msg: String| Err(Error::InvalidConfig(format!("tableau {name}: {msg}")));
        if s == 0 || c.len() != s || a.len() != s {
            return invalid("a, b and c must describe the same number of stages".into());
        }
        for (i, row) in a.iter().enumerate() {
            if row.len() != i {
                return invalid(format!(
                    "row {i} of a must have {i} entries (explicit method)"
                ));
            }
            let sum: f64 = row.iter().sum();
            if (sum - c[i]).abs() > 1e-12 {
                return invalid(format!("row {i} sums to {sum}, expected c = {}", c[i]));
            }
        }
        if (b.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return invalid("weights b must sum to 1".into());
        }
        if let Some(bh) = &b_hat {
            if bh.len() != s || (bh.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return invalid(
                    "embedded weights must have one entry per stage and sum to 1".into(),
                );
            }
        }
        let fsal = s > 1
            && c[s - 1] == 1.0
            && b[s - 1] == 0.0
            && a[s - 1].iter().zip(&b).all(|(x, y)| x == y);
        let error_weights = b_hat
            .as_ref()
            .map(|bh| b.iter().zip(bh).map(|(x, y)| x - y).collect());
        Ok(Self {
            name,
            a,
            b,
            b_hat,
            c,
            order_p,
            solution_order,
            fsal,
            error_weights,
        })
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self, stage: usize) -> &[f64] {
        &self.a[stage]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn b_hat(&self) -> Option<&[f64]> {
        self.b_hat.as_deref()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn order_p(&self) -> u32 {
        self.order_p
    }

    pub fn solution_order(&self) -> u32 {
        self.solution_order
    }

    pub fn fsal(&self) -> bool {
        self.fsal
    }

    /// True when the tableau carries an embedded error estimator.
    pub fn is_adaptive(&self) -> bool {
        self.b_hat.is_some()
    }

    pub(crate) fn error_weights(&self) -> Option<&[f64]> {
        self.error_weights.as_deref()
    }

    /// Looks a catalog tableau up by name (`euler`, `rk2`, `rk4`, `heun_euler`, `bosh3`,
    /// `dopri5`, plus a few aliases).
    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "euler" => Ok(euler()),
            "rk2" | "heun" | "rk2_heun" => Ok(rk2_heun()),
            "rk4" => Ok(rk4()),
            "heun_euler" | "heuneuler" | "heun_euler_12" => Ok(heun_euler_12()),
            "bosh3" | "rk23" | "bogacki_shampine" | "bogacki_shampine_23" => {
                Ok(bogacki_shampine_23())
            }
            "dopri5" | "rk45" | "dormand_prince" | "dormand_prince_45" => Ok(dormand_prince_45()),
            _ => Err(Error::UnknownTableau(name.to_string())),
        }
    }

    /// Every tableau in the catalog.
    pub fn catalog() -> Vec<Self> {
        vec![
            euler(),
            rk2_heun(),
            rk4(),
            heun_euler_12(),
            bogacki_shampine_23(),
            dormand_prince_45(),
        ]
    }
}

fn build(
    name: &'static str,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    b_hat: Option<Vec<f64>>,
    c: Vec<f64>,
    order_p: u32,
    solution_order: u32,
) -> ButcherTableau {
    ButcherTableau::new(name, a, b, b_hat, c, order_p, solution_order)
        .expect("catalog tableau is consistent")
}

/// Forward Euler.
pub fn euler() -> ButcherTableau {
    build("euler", vec![vec![]], vec![1.0], None, vec![0.0], 1, 1)
}

/// Heun's second-order method (explicit trapezoid).
pub fn rk2_heun() -> ButcherTableau {
    build(
        "rk2",
        vec![vec![], vec![1.0]],
        vec![0.5, 0.5],
        None,
        vec![0.0, 1.0],
        2,
        2,
    )
}

/// Classical fourth-order Runge–Kutta.
pub fn rk4() -> ButcherTableau {
    build(
        "rk4",
        vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
        vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
        None,
        vec![0.0, 0.5, 0.5, 1.0],
        4,
        4,
    )
}

/// Heun–Euler 1(2) pair: propagates Heun, estimates error against Euler.
pub fn heun_euler_12() -> ButcherTableau {
    build(
        "heun_euler",
        vec![vec![], vec![1.0]],
        vec![0.5, 0.5],
        Some(vec![1.0, 0.0]),
        vec![0.0, 1.0],
        1,
        2,
    )
}

/// Bogacki–Shampine 3(2) pair with FSAL.
pub fn bogacki_shampine_23() -> ButcherTableau {
    build(
        "bosh3",
        vec![
            vec![],
            vec![0.5],
            vec![0.0, 0.75],
            vec![2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0],
        ],
        vec![2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0, 0.0],
        Some(vec![7.0 / 24.0, 0.25, 1.0 / 3.0, 0.125]),
        vec![0.0, 0.5, 0.75, 1.0],
        2,
        3,
    )
}

/// Dormand–Prince 5(4) pair with FSAL: seven stages, six new evaluations per accepted step.
pub fn dormand_prince_45() -> ButcherTableau {
    let b = vec![
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    build(
        "dopri5",
        vec![
            vec![],
            vec![1.0 / 5.0],
            vec![3.0 / 40.0, 9.0 / 40.0],
            vec![44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
            vec![
                19372.0 / 6561.0,
                -25360.0 / 2187.0,
                64448.0 / 6561.0,
                -212.0 / 729.0,
            ],
            vec![
                9017.0 / 3168.0,
                -355.0 / 33.0,
                46732.0 / 5247.0,
                49.0 / 176.0,
                -5103.0 / 18656.0,
            ],
            b[..6].to_vec(),
        ],
        b,
        Some(vec![
            5179.0 / 57600.0,
            0.0,
            7571.0 / 16695.0,
            393.0 / 640.0,
            -92097.0 / 339200.0,
            187.0 / 2100.0,
            1.0 / 40.0,
        ]),
        vec![0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0],
        4,
        5,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_consistent() {
        for tab in ButcherTableau::catalog() {
            for i in 0..tab.stages() {
                let sum: f64 = tab.a(i).iter().sum();
                assert!((sum - tab.c()[i]).abs() < 1e-12, "{}", tab.name());
            }
            assert!((tab.b().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            if let Some(bh) = tab.b_hat() {
                assert!((bh.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fsal_detection() {
        assert!(dormand_prince_45().fsal());
        assert_eq!(dormand_prince_45().stages(), 7);
        assert!(bogacki_shampine_23().fsal());
        assert!(!rk4().fsal());
        assert!(!heun_euler_12().fsal());
    }

    #[test]
    fn rejects_inconsistent_rows() {
        let bad = ButcherTableau::new(
            "bad",
            vec![vec![], vec![0.4]],
            vec![0.5, 0.5],
            None,
            vec![0.0, 0.5],
            1,
            1,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(ButcherTableau::by_name("RK45").unwrap().name(), "dopri5");
        assert!(matches!(
            ButcherTableau::by_name("rk7"),
            Err(Error::UnknownTableau(_))
        ));
    }
}
