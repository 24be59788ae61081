//! Reverse-mode tape over solver operations.
//!
//! Node values are produced by the same kernels as [`Solver::step`](crate::solvers::Solver::step),
//! so a step recorded here reproduces the plain forward step bit for bit. The naive method records
//! an entire integration on one tape; ACA records a single step at a time.

use crate::dynamics::DifferentiableDynamics;
use crate::error::{Error, Result};
use crate::solvers::{
    combine, controller_factor, ensure_finite, error_norm, error_norm_vjp, error_vector,
    stage_time, ButcherTableau, SolverConfig,
};

pub(crate) type NodeId = usize;

#[derive(Clone, Copy, Debug)]
enum Row {
    A(usize),
    B,
}

#[derive(Debug)]
enum Op {
    Input,
    Eval {
        t: f64,
        z: NodeId,
    },
    Combine {
        base: NodeId,
        h: NodeId,
        row: Row,
        ks: Vec<NodeId>,
        sum: Vec<f64>,
    },
    ErrVec {
        h: NodeId,
        ks: Vec<NodeId>,
        sum: Vec<f64>,
    },
    ErrNorm {
        err: NodeId,
        z_old: NodeId,
        z_new: NodeId,
    },
    Controller {
        err: NodeId,
        h: NodeId,
        factor: f64,
        d_factor: f64,
    },
    Add {
        a: NodeId,
        b: NodeId,
    },
    Sub {
        a: NodeId,
        b: NodeId,
    },
}

#[derive(Debug)]
struct Node {
    op: Op,
    value: Vec<f64>,
}

/// Nodes produced by [`Tape::record_step`].
pub(crate) struct StepNodes {
    pub z_new: NodeId,
    pub stages: Vec<NodeId>,
    pub err_norm: Option<NodeId>,
    pub f_evals: usize,
}

pub(crate) struct Tape<'a> {
    tableau: &'a ButcherTableau,
    config: &'a SolverConfig,
    nodes: Vec<Node>,
    budget: usize,
}

impl<'a> Tape<'a> {
    pub fn new(tableau: &'a ButcherTableau, config: &'a SolverConfig, budget: usize) -> Self {
        Self {
            tableau,
            config,
            nodes: Vec::new(),
            budget,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id].value
    }

    pub fn scalar(&self, id: NodeId) -> f64 {
        self.nodes[id].value[0]
    }

    fn push(&mut self, op: Op, value: Vec<f64>) -> Result<NodeId> {
        if self.nodes.len() >= self.budget {
            return Err(Error::TapeOverflow {
                nodes: self.nodes.len() + 1,
                budget: self.budget,
            });
        }
        self.nodes.push(Node { op, value });
        Ok(self.nodes.len() - 1)
    }

    pub fn input(&mut self, value: Vec<f64>) -> Result<NodeId> {
        self.push(Op::Input, value)
    }

    pub fn scalar_input(&mut self, value: f64) -> Result<NodeId> {
        self.push(Op::Input, vec![value])
    }

    pub fn eval<D: DifferentiableDynamics + ?Sized>(
        &mut self,
        sys: &D,
        t: f64,
        z: NodeId,
        theta: &[f64],
    ) -> Result<NodeId> {
        let mut out = vec![0.0; self.nodes[z].value.len()];
        sys.eval(t, &self.nodes[z].value, theta, &mut out)?;
        ensure_finite(&out, t)?;
        self.push(Op::Eval { t, z }, out)
    }

    fn coefs(&self, row: Row) -> &'a [f64] {
        match row {
            Row::A(i) => self.tableau.a(i),
            Row::B => self.tableau.b(),
        }
    }

    fn combine(&mut self, base: NodeId, h: NodeId, row: Row, ks: &[NodeId]) -> Result<NodeId> {
        let n = self.nodes[base].value.len();
        let mut sum = vec![0.0; n];
        let mut out = vec![0.0; n];
        {
            let stage_values: Vec<Vec<f64>> =
                ks.iter().map(|&k| self.nodes[k].value.clone()).collect();
            combine(
                &self.nodes[base].value,
                self.scalar(h),
                self.coefs(row),
                &stage_values,
                &mut sum,
                &mut out,
            );
        }
        self.push(
            Op::Combine {
                base,
                h,
                row,
                ks: ks.to_vec(),
                sum,
            },
            out,
        )
    }

    fn err_vec(&mut self, h: NodeId, ks: &[NodeId]) -> Result<NodeId> {
        let weights = self.tableau.error_weights().expect("embedded tableau");
        let n = self.nodes[ks[0]].value.len();
        let mut sum = vec![0.0; n];
        let mut out = vec![0.0; n];
        let stage_values: Vec<Vec<f64>> = ks.iter().map(|&k| self.nodes[k].value.clone()).collect();
        error_vector(self.scalar(h), weights, &stage_values, &mut sum, &mut out);
        self.push(
            Op::ErrVec {
                h,
                ks: ks.to_vec(),
                sum,
            },
            out,
        )
    }

    fn err_norm(&mut self, err: NodeId, z_old: NodeId, z_new: NodeId) -> Result<NodeId> {
        let v = error_norm(
            &self.nodes[err].value,
            &self.nodes[z_old].value,
            &self.nodes[z_new].value,
            self.config.atol,
            self.config.rtol,
        );
        self.push(Op::ErrNorm { err, z_old, z_new }, vec![v])
    }

    /// `h_next = h · factor(err)`, the differentiable step-size controller.
    pub fn controller(&mut self, err: NodeId, h: NodeId) -> Result<NodeId> {
        let (factor, d_factor) =
            controller_factor(self.scalar(err), self.tableau.order_p(), self.config);
        let value = self.scalar(h) * factor;
        self.push(
            Op::Controller {
                err,
                h,
                factor,
                d_factor,
            },
            vec![value],
        )
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.scalar(a) + self.scalar(b);
        self.push(Op::Add { a, b }, vec![v])
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.scalar(a) - self.scalar(b);
        self.push(Op::Sub { a, b }, vec![v])
    }

    /// Records one application of the one-step map from state node `z` at time `t`.
    ///
    /// Mirrors the plain stepper exactly, including FSAL handling of the last stage.
    pub fn record_step<D: DifferentiableDynamics + ?Sized>(
        &mut self,
        sys: &D,
        t: f64,
        z: NodeId,
        h: NodeId,
        theta: &[f64],
        first_stage: Option<NodeId>,
        with_error: bool,
    ) -> Result<StepNodes> {
        let tab = self.tableau;
        let s = tab.stages();
        let h_val = self.scalar(h);
        let mut f_evals = 0;
        let mut stages = Vec::with_capacity(s);
        match first_stage {
            Some(k) => stages.push(k),
            None => {
                stages.push(self.eval(sys, t, z, theta)?);
                f_evals += 1;
            }
        }
        let explicit = if tab.fsal() { s - 1 } else { s };
        for i in 1..explicit {
            let arg = self.combine(z, h, Row::A(i), &stages)?;
            stages.push(self.eval(sys, stage_time(t, tab.c()[i], h_val), arg, theta)?);
            f_evals += 1;
        }
        let z_new = self.combine(z, h, Row::B, &stages)?;
        ensure_finite(self.value(z_new), t + h_val)?;
        if tab.fsal() {
            stages.push(self.eval(sys, stage_time(t, tab.c()[s - 1], h_val), z_new, theta)?);
            f_evals += 1;
        }
        let err_norm = if with_error && tab.is_adaptive() {
            let e = self.err_vec(h, &stages)?;
            Some(self.err_norm(e, z, z_new)?)
        } else {
            None
        };
        Ok(StepNodes {
            z_new,
            stages,
            err_norm,
            f_evals,
        })
    }

    /// Propagates the cotangent seeds back through the tape.
    ///
    /// Returns the cotangents of all nodes (only inputs are retained) and the accumulated
    /// parameter cotangent, plus the number of vector-Jacobian products taken.
    pub fn backward<D: DifferentiableDynamics + ?Sized>(
        &self,
        sys: &D,
        theta: &[f64],
        seeds: &[(NodeId, &[f64])],
    ) -> Result<Backward> {
        let n = self.nodes.len();
        let mut adj: Vec<Option<Vec<f64>>> = vec![None; n];
        for (id, seed) in seeds {
            accumulate(&mut adj[*id], seed);
        }
        let mut theta_grad = vec![0.0; theta.len()];
        let mut vjps = 0;
        let mut vz = Vec::new();
        let mut vt = vec![0.0; theta.len()];
        for id in (0..n).rev() {
            let node = &self.nodes[id];
            if matches!(node.op, Op::Input) {
                continue;
            }
            let Some(g) = adj[id].take() else { continue };
            match &node.op {
                Op::Input => unreachable!(),
                Op::Eval { t, z } => {
                    vz.resize(g.len(), 0.0);
                    sys.vjp(*t, &self.nodes[*z].value, theta, &g, &mut vz, &mut vt)?;
                    vjps += 1;
                    accumulate(&mut adj[*z], &vz);
                    for (acc, v) in theta_grad.iter_mut().zip(&vt) {
                        *acc += v;
                    }
                }
                Op::Combine {
                    base,
                    h,
                    row,
                    ks,
                    sum,
                } => {
                    accumulate(&mut adj[*base], &g);
                    let h_val = self.scalar(*h);
                    for (c, k) in self.coefs(*row).iter().zip(ks) {
                        if *c != 0.0 {
                            let scaled: Vec<f64> = g.iter().map(|x| h_val * c * x).collect();
                            accumulate(&mut adj[*k], &scaled);
                        }
                    }
                    let dh: f64 = g.iter().zip(sum).map(|(a, b)| a * b).sum();
                    accumulate(&mut adj[*h], &[dh]);
                }
                Op::ErrVec { h, ks, sum } => {
                    let weights = self.tableau.error_weights().expect("embedded tableau");
                    let h_val = self.scalar(*h);
                    for (c, k) in weights.iter().zip(ks) {
                        if *c != 0.0 {
                            let scaled: Vec<f64> = g.iter().map(|x| h_val * c * x).collect();
                            accumulate(&mut adj[*k], &scaled);
                        }
                    }
                    let dh: f64 = g.iter().zip(sum).map(|(a, b)| a * b).sum();
                    accumulate(&mut adj[*h], &[dh]);
                }
                Op::ErrNorm { err, z_old, z_new } => {
                    let dim = self.nodes[*err].value.len();
                    let (mut ge, mut go, mut gn) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
                    error_norm_vjp(
                        &self.nodes[*err].value,
                        &self.nodes[*z_old].value,
                        &self.nodes[*z_new].value,
                        self.config.atol,
                        self.config.rtol,
                        node.value[0],
                        g[0],
                        &mut ge,
                        &mut go,
                        &mut gn,
                    );
                    accumulate(&mut adj[*err], &ge);
                    accumulate(&mut adj[*z_old], &go);
                    accumulate(&mut adj[*z_new], &gn);
                }
                Op::Controller {
                    err,
                    h,
                    factor,
                    d_factor,
                } => {
                    accumulate(&mut adj[*h], &[g[0] * factor]);
                    accumulate(&mut adj[*err], &[g[0] * self.scalar(*h) * d_factor]);
                }
                Op::Add { a, b } => {
                    accumulate(&mut adj[*a], &g);
                    accumulate(&mut adj[*b], &g);
                }
                Op::Sub { a, b } => {
                    accumulate(&mut adj[*a], &g);
                    accumulate(&mut adj[*b], &[-g[0]]);
                }
            }
        }
        Ok(Backward {
            adjoints: adj,
            theta_grad,
            vjps,
        })
    }
}

pub(crate) struct Backward {
    adjoints: Vec<Option<Vec<f64>>>,
    pub theta_grad: Vec<f64>,
    pub vjps: usize,
}

impl Backward {
    /// Cotangent of an input node (zeros when nothing reached it).
    pub fn input_adjoint(&self, id: NodeId, dim: usize) -> Vec<f64> {
        self.adjoints[id].clone().unwrap_or_else(|| vec![0.0; dim])
    }
}

fn accumulate(slot: &mut Option<Vec<f64>>, v: &[f64]) {
    let acc = slot.get_or_insert_with(|| vec![0.0; v.len()]);
    for (a, x) in acc.iter_mut().zip(v) {
        *a += x;
    }
}
