use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::optimize::{minimize_on_spheres, OptimizerOptions, StepRule};
use super::{
    binomial, project_tangent, verify_design, DesignCertificate, ResidualKernel, VerifyOptions,
};
use crate::energy::{CompensatedSum, SumOptions};
use crate::error::{invalid, Result};
use crate::geom::{dot, generate::random_uniform_with, min_separation, PointSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructOptions {
    /// Certification tolerance on the total residual.
    pub tolerance: f64,
    /// The residual phase stops once the objective reaches this value.
    pub polish_target: f64,
    pub max_iters: usize,
    /// Iterations of log-energy descent spreading the random start.
    pub spread_iters: usize,
    pub rule: StepRule,
    /// Separation goal `c` in `min |x_i - x_j| >= c N^{-1/d}`.
    pub separation_target: f64,
    /// Weight of the squared-hinge separation penalty.
    pub separation_weight: f64,
    pub restarts: usize,
    pub deterministic: bool,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self {
            tolerance: super::DEFAULT_TOLERANCE,
            polish_target: 1e-14,
            max_iters: 20_000,
            spread_iters: 2_000,
            rule: StepRule::default(),
            separation_target: 1.0,
            separation_weight: 1.0,
            restarts: 2,
            deterministic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub spread_iterations: usize,
    pub iterations: usize,
    pub total_residual: f64,
    pub min_separation: f64,
    pub stalled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructOutcome {
    #[serde(skip)]
    pub points: Option<PointSet>,
    pub certificate: DesignCertificate,
    pub seed: u64,
    /// Absolute separation goal `c N^{-1/d}`.
    pub separation_goal: f64,
    pub separation_met: bool,
    pub chosen_restart: usize,
    pub restarts: Vec<RestartSummary>,
}

impl ConstructOutcome {
    pub fn points(&self) -> &PointSet {
        self.points
            .as_ref()
            .expect("constructed outcome carries its points")
    }

    pub fn success(&self) -> bool {
        self.certificate.passed() && self.separation_met
    }
}

/// Smallest `N` for which a `t`-design on S^d can exist:
/// `C(d+e, d) + C(d+e-1, d)` for `t = 2e`, `2 C(d+e, d)` for `t = 2e+1`.
pub fn delsarte_bound(d: usize, t: usize) -> usize {
    let e = t / 2;
    let v = if t.is_multiple_of(2) {
        binomial(d + e, d) + if e >= 1 { binomial(d + e - 1, d) } else { 0 }
    } else {
        2 * binomial(d + e, d)
    };
    v as usize
}

/// `ceil(c (t + 1)^d)`, raised to the Delsarte bound when smaller.
pub fn default_point_count(d: usize, t: usize, c: f64) -> usize {
    let n = (c * ((t + 1) as f64).powi(d as i32)).ceil() as usize;
    n.max(delsarte_bound(d, t))
}

struct SpreadObjective {
    dim: usize,
}

impl SpreadObjective {
    // (1/N²) Σ_{i<j} log 1/|x_i - x_j|²
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let dim = self.dim;
        let n = x.len() / dim;
        let scale = 1.0 / (n as f64 * n as f64);
        let rows: Vec<f64> = grad
            .par_chunks_mut(dim)
            .enumerate()
            .map(|(i, gi)| {
                let xi = &x[i * dim..(i + 1) * dim];
                gi.iter_mut().for_each(|g| *g = 0.0);
                let mut row = CompensatedSum::default();
                for j in (0..n).filter(|&j| j != i) {
                    let xj = &x[j * dim..(j + 1) * dim];
                    let d2 = (2.0 - 2.0 * dot(xi, xj)).max(1e-300);
                    row.add(-d2.ln());
                    // d/dx_i of -log(2 - 2<x_i, x_j>) = 2 x_j / d²
                    let c = 2.0 * scale / d2;
                    gi.iter_mut().zip(xj).for_each(|(g, v)| *g += c * v);
                }
                project_tangent(gi, xi);
                row.value()
            })
            .collect();
        let total: CompensatedSum = rows.into_iter().collect();
        0.5 * scale * total.value()
    }
}

struct DesignObjective {
    kernel: ResidualKernel,
    dim: usize,
    delta: f64,
    weight: f64,
}

impl DesignObjective {
    // total residual + w Σ_{i<j} max(0, δ - |x_i - x_j|)²
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let dim = self.dim;
        let n = x.len() / dim;
        let nf = n as f64;
        let scale = 1.0 / (nf * nf);
        let t = self.kernel.t;
        let rows: Vec<(f64, f64)> = grad
            .par_chunks_mut(dim)
            .enumerate()
            .map(|(i, gi)| {
                let mut p = vec![0.0; t + 1];
                let mut dp = vec![0.0; t + 1];
                let xi = &x[i * dim..(i + 1) * dim];
                gi.iter_mut().for_each(|g| *g = 0.0);
                let mut resid = CompensatedSum::default();
                let mut penalty = 0.0;
                for j in (0..n).filter(|&j| j != i) {
                    let xj = &x[j * dim..(j + 1) * dim];
                    let ip = dot(xi, xj);
                    let (k, dk) = self.kernel.eval(ip, &mut p, &mut dp);
                    resid.add(k);
                    let mut c = 2.0 * scale * dk;
                    let dist = (2.0 - 2.0 * ip).max(0.0).sqrt();
                    let gap = self.delta - dist;
                    if self.weight > 0.0 && gap > 0.0 {
                        penalty += gap * gap;
                        // d dist / d x_i = -x_j / dist on the sphere (tangent part)
                        c += 2.0 * self.weight * gap / dist.max(1e-300);
                    }
                    gi.iter_mut().zip(xj).for_each(|(g, v)| *g += c * v);
                }
                project_tangent(gi, xi);
                (resid.value(), penalty)
            })
            .collect();
        let mut total = CompensatedSum::default();
        let mut pen = CompensatedSum::default();
        for (r, q) in rows {
            total.add(r);
            pen.add(q);
        }
        total.add(nf * self.kernel.at_one);
        scale * total.value() + 0.5 * self.weight * pen.value()
    }
}

/// Builds `N` points on S^d approximating a `t`-design with well-separated
/// points.
///
/// Each restart draws seeded uniform points, spreads them by descending the
/// log energy, then minimizes total residual plus a separation penalty.
/// Restarts run in parallel; the best one is certified and returned. The
/// outcome is returned whether or not certification passes.
pub fn construct_design(
    d: usize,
    t: usize,
    n: Option<usize>,
    seed: u64,
    opts: ConstructOptions,
) -> Result<ConstructOutcome> {
    if d < 2 || t < 1 {
        return Err(invalid(format!(
            "need d >= 2 and t >= 1, got d = {d}, t = {t}"
        )));
    }
    let n = n.unwrap_or_else(|| default_point_count(d, t, 1.0));
    let lower = delsarte_bound(d, t);
    if n < lower {
        return Err(invalid(format!(
            "no {t}-design on S^{d} has fewer than {lower} points (requested N = {n})"
        )));
    }
    if opts.restarts == 0 || !(opts.tolerance > 0.0) {
        return Err(invalid(
            "need at least one restart and a positive tolerance",
        ));
    }
    let dim = d + 1;
    let delta = opts.separation_target * (n as f64).powf(-1.0 / d as f64);
    let kernel = ResidualKernel::new(d, t)?;
    let sum = if opts.deterministic {
        SumOptions::deterministic()
    } else {
        SumOptions::default()
    };

    let runs: Vec<(Vec<f64>, RestartSummary)> = (0..opts.restarts)
        .into_par_iter()
        .map(|restart| -> Result<_> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(restart as u64);
            let mut x = random_uniform_with(d, n, &mut rng)?.into_coords();
            let spread = SpreadObjective { dim };
            let spread_stats = if n >= 2 && opts.spread_iters > 0 {
                minimize_on_spheres(
                    &|x: &[f64], g: &mut [f64]| spread.eval(x, g),
                    &mut x,
                    dim,
                    OptimizerOptions {
                        max_iters: opts.spread_iters,
                        rule: opts.rule,
                        grad_tolerance: 1e-10,
                        ..Default::default()
                    },
                )
                .iterations
            } else {
                0
            };
            let objective = DesignObjective {
                kernel: kernel.clone(),
                dim,
                delta,
                weight: opts.separation_weight,
            };
            let stats = minimize_on_spheres(
                &|x: &[f64], g: &mut [f64]| objective.eval(x, g),
                &mut x,
                dim,
                OptimizerOptions {
                    max_iters: opts.max_iters,
                    rule: opts.rule,
                    target: opts.polish_target,
                    grad_tolerance: 0.0,
                },
            );
            let set = PointSet::normalized(d, x.clone())?;
            let residual = super::total_residual(&set, t, sum)?;
            let sep = if n >= 2 { min_separation(&set)? } else { 0.0 };
            Ok((
                x,
                RestartSummary {
                    restart,
                    spread_iterations: spread_stats,
                    iterations: stats.iterations,
                    total_residual: residual,
                    min_separation: sep,
                    stalled: stats.stalled,
                },
            ))
        })
        .collect::<Result<_>>()?;

    let score = |r: &RestartSummary| {
        let ok = r.total_residual <= opts.tolerance && (n < 2 || r.min_separation >= delta);
        (!ok, r.total_residual)
    };
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            score(&a.1)
                .partial_cmp(&score(&b.1))
                .expect("finite residuals")
        })
        .map(|(i, _)| i)
        .expect("at least one restart");

    let points = PointSet::normalized(d, runs[best].0.clone())?
        .with_label(format!("constructed d={d} t={t} N={n} seed={seed}"));
    let certificate = verify_design(
        &points,
        t,
        opts.tolerance,
        VerifyOptions {
            sum,
            ..Default::default()
        },
    )?;
    let separation_met = n < 2 || certificate.min_separation >= delta;
    Ok(ConstructOutcome {
        points: Some(points),
        certificate,
        seed,
        separation_goal: delta,
        separation_met,
        chosen_restart: best,
        restarts: runs.into_iter().map(|(_, s)| s).collect(),
    })
}
