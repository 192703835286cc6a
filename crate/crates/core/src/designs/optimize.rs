//! First-order minimization over products of unit spheres.
//!
//! Iterates are kept on the spheres by renormalizing each row after every
//! step (a projection retraction). Search directions come from L-BFGS,
//! Barzilai-Borwein or a fixed step along the projected gradient, and every
//! step is backtracked until the Armijo condition holds.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::geom::{dot, norm};

/// An objective on `N` unit rows of length `dim`.
pub trait SphereObjective: Sync {
    /// Returns the value at `x` and writes the tangent-projected gradient.
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

impl<F: Fn(&[f64], &mut [f64]) -> f64 + Sync> SphereObjective for F {
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self(x, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StepRule {
    /// Limited-memory BFGS with `memory` correction pairs.
    Lbfgs { memory: usize },
    /// Barzilai-Borwein step lengths along the negative gradient.
    BarzilaiBorwein,
    /// Constant initial step along the negative gradient.
    Fixed { step: f64 },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Lbfgs { memory: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    pub max_iters: usize,
    pub rule: StepRule,
    /// Stop once the objective drops to this value.
    pub target: f64,
    /// Stop once the gradient norm drops to this value.
    pub grad_tolerance: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            rule: StepRule::default(),
            target: f64::NEG_INFINITY,
            grad_tolerance: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerStats {
    pub iterations: usize,
    pub evaluations: usize,
    pub value: f64,
    pub gradient_norm: f64,
    /// The line search could not make progress before `max_iters`.
    pub stalled: bool,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

fn retract(x: &mut [f64], dim: usize) {
    for row in x.chunks_exact_mut(dim) {
        let n = norm(row);
        row.iter_mut().for_each(|v| *v /= n);
    }
}

/// Minimizes `objective` starting from the unit rows in `x`, in place.
pub fn minimize_on_spheres<O: SphereObjective + ?Sized>(
    objective: &O,
    x: &mut Vec<f64>,
    dim: usize,
    opts: OptimizerOptions,
) -> OptimizerStats {
    let len = x.len();
    let mut g = vec![0.0; len];
    let mut f = objective.value_and_gradient(x, &mut g);
    let mut evaluations = 1;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut last_bb: Option<f64> = None;
    let mut trial = vec![0.0; len];
    let mut g_trial = vec![0.0; len];
    let mut stalled = false;
    let mut iterations = 0;

    while iterations < opts.max_iters {
        let gnorm = norm(&g);
        if f <= opts.target || gnorm <= opts.grad_tolerance || !f.is_finite() {
            break;
        }
        let (mut p, mut alpha) = match opts.rule {
            StepRule::Lbfgs { .. } => {
                let p = two_loop(&g, &history);
                let a = if history.is_empty() {
                    1.0 / gnorm.max(1.0)
                } else {
                    1.0
                };
                (p, a)
            }
            StepRule::BarzilaiBorwein => (
                g.iter().map(|v| -v).collect(),
                last_bb.unwrap_or(1.0 / gnorm.max(1.0)),
            ),
            StepRule::Fixed { step } => (g.iter().map(|v| -v).collect(), step),
        };
        let mut slope = dot(&g, &p);
        if !(slope < 0.0) {
            history.clear();
            p = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
            alpha = 1.0 / gnorm.max(1.0);
        }

        let mut accepted = None;
        for attempt in 0..2 {
            let mut a = alpha;
            for _ in 0..MAX_BACKTRACKS {
                trial
                    .iter_mut()
                    .zip(x.iter())
                    .zip(&p)
                    .for_each(|((t, xv), pv)| *t = xv + a * pv);
                retract(&mut trial, dim);
                let ft = objective.value_and_gradient(&trial, &mut g_trial);
                evaluations += 1;
                if ft.is_finite() && ft <= f + ARMIJO * a * slope {
                    accepted = Some(ft);
                    break;
                }
                a *= 0.5;
            }
            if accepted.is_some() || attempt == 1 {
                break;
            }
            // retry once from steepest descent with fresh curvature memory
            history.clear();
            p = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
            alpha = 1.0 / gnorm.max(1.0);
        }
        let Some(ft) = accepted else {
            stalled = true;
            break;
        };
        iterations += 1;

        let s: Vec<f64> = trial.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_trial.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        match opts.rule {
            StepRule::Lbfgs { memory } => {
                if sy > 1e-14 * norm(&s) * norm(&y) && sy > 0.0 {
                    if history.len() == memory.max(1) {
                        history.pop_front();
                    }
                    history.push_back((s, y, 1.0 / sy));
                }
            }
            StepRule::BarzilaiBorwein => {
                last_bb = (sy > 0.0).then(|| dot(&s, &s) / sy);
            }
            StepRule::Fixed { .. } => {}
        }
        std::mem::swap(x, &mut trial);
        std::mem::swap(&mut g, &mut g_trial);
        f = ft;
    }
    OptimizerStats {
        iterations,
        evaluations,
        value: f,
        gradient_norm: norm(&g),
        stalled,
    }
}

/// L-BFGS two-loop recursion: returns `-H g`.
fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qv, yv)| *qv -= a * yv);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qv, sv)| *qv += (a - b) * sv);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}
