//! Spherical t-designs: certification through addition-theorem residuals and
//! construction by residual minimization.
//!
//! For the normalized Gegenbauer polynomial `P̄_n` (`P̄_n(1) = 1`) on S^d,
//!
//! ```text
//! r_n = Z(d, n) / N² · Σ_{i,j} P̄_n(<x_i, x_j>)
//! ```
//!
//! is the squared norm of the mean of an orthonormal basis of degree-`n`
//! harmonics over the points, so `X` is a `t`-design iff `r_1 = … = r_t = 0`.

mod construct;
mod optimize;

pub use construct::{
    construct_design, default_point_count, delsarte_bound, ConstructOptions, ConstructOutcome,
    RestartSummary,
};
pub use optimize::{
    minimize_on_spheres, OptimizerOptions, OptimizerStats, SphereObjective, StepRule,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::energy::{sum_rows, CompensatedSum, SumOptions};
use crate::error::{invalid, Error, Result};
use crate::geom::{dot, min_separation, PointSet};

/// Residuals in `[-NEGATIVE_FLOOR, 0)` are rounding noise and read as 0.
pub const NEGATIVE_FLOOR: f64 = 1e-12;

/// Default certification tolerance on the total residual.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Dimension of the space of degree-`n` spherical harmonics on S^d,
/// `C(n+d, d) - C(n+d-2, d)`.
pub fn dim_harmonics(d: usize, n: usize) -> Result<u64> {
    if d < 2 {
        return Err(invalid(format!("sphere dimension d = {d} must be >= 2")));
    }
    let upper = binomial(n + d, d);
    let lower = if n >= 2 { binomial(n + d - 2, d) } else { 0 };
    u64::try_from(upper - lower).map_err(|_| invalid("harmonic dimension overflows u64"))
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    // each partial product is itself a binomial coefficient, so division is exact
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Weights `Z(d, n)` for `n = 0..=t` as floats.
fn harmonic_weights(d: usize, t: usize) -> Result<Vec<f64>> {
    (0..=t)
        .map(|n| dim_harmonics(d, n).map(|z| z as f64))
        .collect()
}

/// `P̄_0 .. P̄_t` at `x` by the normalized recurrence
/// `P̄_{n+1} = ((2n+d-1) x P̄_n - n P̄_{n-1}) / (n+d-1)`.
pub(crate) fn gegenbauer_normalized(d: usize, x: f64, out: &mut [f64]) {
    let Some(first) = out.first_mut() else {
        return;
    };
    *first = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    let df = d as f64;
    for n in 1..out.len().saturating_sub(1) {
        let nf = n as f64;
        out[n + 1] = ((2.0 * nf + df - 1.0) * x * out[n] - nf * out[n - 1]) / (nf + df - 1.0);
    }
}

/// Values and derivatives of `P̄_0 .. P̄_t` at `x`.
pub(crate) fn gegenbauer_normalized_with_derivative(
    d: usize,
    x: f64,
    p: &mut [f64],
    dp: &mut [f64],
) {
    gegenbauer_normalized(d, x, p);
    if dp.is_empty() {
        return;
    }
    dp[0] = 0.0;
    if dp.len() > 1 {
        dp[1] = 1.0;
    }
    let df = d as f64;
    for n in 1..dp.len().saturating_sub(1) {
        let nf = n as f64;
        let c = 2.0 * nf + df - 1.0;
        dp[n + 1] = (c * (p[n] + x * dp[n]) - nf * dp[n - 1]) / (nf + df - 1.0);
    }
}

/// Per-degree residuals `r_1 ..= r_t`.
pub fn design_residual(points: &PointSet, t: usize, opts: SumOptions) -> Result<Vec<f64>> {
    if t < 1 {
        return Err(invalid("design strength t must be >= 1"));
    }
    let d = points.d();
    let n = points.len();
    let z = harmonic_weights(d, t)?;
    let sums = sum_rows(n, t, opts, |i, acc| {
        let mut p = vec![0.0; t + 1];
        let xi = points.point(i);
        for j in i + 1..n {
            gegenbauer_normalized(d, dot(xi, points.point(j)).clamp(-1.0, 1.0), &mut p);
            for (a, v) in acc.iter_mut().zip(&p[1..]) {
                a.add(2.0 * v);
            }
        }
    });
    let nf = n as f64;
    sums.iter()
        .enumerate()
        .map(|(k, off)| {
            let mut acc = CompensatedSum::default();
            acc.add(*off);
            acc.add(nf); // diagonal: P̄_n(1) = 1
            let r = z[k + 1] * acc.value() / (nf * nf);
            clamp_residual(k + 1, r)
        })
        .collect()
}

fn clamp_residual(degree: usize, r: f64) -> Result<f64> {
    if r >= 0.0 {
        Ok(r)
    } else if r >= -NEGATIVE_FLOOR {
        Ok(0.0)
    } else {
        Err(Error::Consistency(format!(
            "degree-{degree} residual {r:e} is negative beyond rounding"
        )))
    }
}

/// `Σ_n r_n`.
pub fn total_residual(points: &PointSet, t: usize, opts: SumOptions) -> Result<f64> {
    Ok(design_residual(points, t, opts)?.iter().sum())
}

/// Tangent-projected Euclidean gradient of the total residual, one row of
/// length `d + 1` per point, flattened.
pub fn residual_gradient(points: &PointSet, t: usize) -> Result<Vec<f64>> {
    if t < 1 {
        return Err(invalid("design strength t must be >= 1"));
    }
    let kernel = ResidualKernel::new(points.d(), t)?;
    let dim = points.ambient_dim();
    let mut grad = vec![0.0; points.coords().len()];
    kernel.value_and_gradient(points.coords(), dim, &mut grad);
    Ok(grad)
}

/// The zonal kernel `K(x) = Σ_{n=1}^t Z(d,n) P̄_n(x)` behind the total
/// residual, `Σ r_n = (1/N²) Σ_{i,j} K(<x_i, x_j>)`.
#[derive(Debug, Clone)]
pub(crate) struct ResidualKernel {
    d: usize,
    t: usize,
    weights: Vec<f64>,
    at_one: f64,
}

impl ResidualKernel {
    pub(crate) fn new(d: usize, t: usize) -> Result<Self> {
        let mut weights = harmonic_weights(d, t)?;
        weights[0] = 0.0;
        let at_one = weights.iter().sum();
        Ok(Self {
            d,
            t,
            weights,
            at_one,
        })
    }

    fn eval(&self, x: f64, p: &mut [f64], dp: &mut [f64]) -> (f64, f64) {
        gegenbauer_normalized_with_derivative(self.d, x.clamp(-1.0, 1.0), p, dp);
        let mut k = 0.0;
        let mut dk = 0.0;
        for n in 1..=self.t {
            k += self.weights[n] * p[n];
            dk += self.weights[n] * dp[n];
        }
        (k, dk)
    }

    /// Total residual of unit rows `coords` and its projected gradient.
    /// Rows are independent, and the value is reduced in row order, so the
    /// result does not depend on the thread count.
    pub(crate) fn value_and_gradient(&self, coords: &[f64], dim: usize, grad: &mut [f64]) -> f64 {
        let n = coords.len() / dim;
        let nf = n as f64;
        let scale = 1.0 / (nf * nf);
        let rows: Vec<f64> = grad
            .par_chunks_mut(dim)
            .enumerate()
            .map(|(i, gi)| {
                let mut p = vec![0.0; self.t + 1];
                let mut dp = vec![0.0; self.t + 1];
                let xi = &coords[i * dim..(i + 1) * dim];
                gi.iter_mut().for_each(|g| *g = 0.0);
                let mut row = CompensatedSum::default();
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let xj = &coords[j * dim..(j + 1) * dim];
                    let (k, dk) = self.eval(dot(xi, xj), &mut p, &mut dp);
                    row.add(k);
                    let c = 2.0 * scale * dk;
                    gi.iter_mut().zip(xj).for_each(|(g, v)| *g += c * v);
                }
                project_tangent(gi, xi);
                row.value()
            })
            .collect();
        let mut total: CompensatedSum = rows.into_iter().collect();
        total.add(nf * self.at_one);
        scale * total.value()
    }
}

pub(crate) fn project_tangent(g: &mut [f64], x: &[f64]) {
    let r = dot(g, x);
    g.iter_mut().zip(x).for_each(|(gv, xv)| *gv -= r * xv);
}

/// Outcome of a [`verify_design`] call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Independent check of the residual verdict on random monomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotCheck {
    pub monomials: usize,
    /// Largest `|mean over X - exact integral|` seen.
    pub max_error: f64,
    /// Largest allowed error for a monomial of the sampled sizes.
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCertificate {
    pub t: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub per_degree_residuals: Vec<f64>,
    pub total_residual: f64,
    pub min_separation: f64,
    pub separation_constant: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub spot_check: SpotCheck,
}

impl DesignCertificate {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub sum: SumOptions,
    pub spot_monomials: usize,
    pub spot_seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            sum: SumOptions::default(),
            spot_monomials: 32,
            spot_seed: 0x5eed,
        }
    }
}

/// Certifies `points` as a `t`-design within `tolerance` on the total
/// residual, then cross-checks random monomials of degree `<= t`.
///
/// A monomial `p` integrates with error at most `||p||_2 · sqrt(Σ r_n)`, so
/// the spot-check threshold is the larger of `10 · tolerance` and ten times
/// that bound. A spot-check failure under a passing residual means the two
/// computations disagree and is reported as an error.
pub fn verify_design(
    points: &PointSet,
    t: usize,
    tolerance: f64,
    opts: VerifyOptions,
) -> Result<DesignCertificate> {
    if !(tolerance > 0.0) {
        return Err(invalid(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let residuals = design_residual(points, t, opts.sum)?;
    let total: f64 = residuals.iter().sum();
    let n = points.len();
    let (sep, sep_const) = if n >= 2 {
        let s = min_separation(points)?;
        (s, s * (n as f64).powf(1.0 / points.d() as f64))
    } else {
        (0.0, 0.0)
    };
    let verdict = if total <= tolerance {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let spot = spot_check(points, t, tolerance, total, &opts);
    if verdict == Verdict::Pass && !spot.passed {
        return Err(Error::Consistency(format!(
            "residual {total:e} passes but a monomial integrates with error {:e} > {:e}",
            spot.max_error, spot.threshold
        )));
    }
    Ok(DesignCertificate {
        t,
        n,
        d: points.d(),
        per_degree_residuals: residuals,
        total_residual: total,
        min_separation: sep,
        separation_constant: sep_const,
        tolerance,
        verdict,
        spot_check: spot,
    })
}

fn spot_check(
    points: &PointSet,
    t: usize,
    tolerance: f64,
    total: f64,
    opts: &VerifyOptions,
) -> SpotCheck {
    let dim = points.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.spot_seed);
    let mut max_error = 0.0f64;
    let mut threshold = f64::INFINITY;
    for _ in 0..opts.spot_monomials {
        let degree = rng.random_range(1..=t);
        let mut alpha = vec![0usize; dim];
        for _ in 0..degree {
            alpha[rng.random_range(0..dim)] += 1;
        }
        let exact = monomial_integral(&alpha);
        let doubled: Vec<usize> = alpha.iter().map(|a| 2 * a).collect();
        let l2 = monomial_integral(&doubled).sqrt();
        let mean: CompensatedSum = points
            .iter()
            .map(|x| {
                x.iter()
                    .zip(&alpha)
                    .map(|(v, &a)| v.powi(a as i32))
                    .product::<f64>()
            })
            .collect();
        let err = (mean.value() / points.len() as f64 - exact).abs();
        let allowed = (10.0 * tolerance).max(10.0 * l2 * total.sqrt()) + 1e-14;
        max_error = max_error.max(err);
        threshold = threshold.min(allowed);
        if err > allowed {
            return SpotCheck {
                monomials: opts.spot_monomials,
                max_error: err,
                threshold: allowed,
                passed: false,
            };
        }
    }
    SpotCheck {
        monomials: opts.spot_monomials,
        max_error,
        threshold: if threshold.is_finite() {
            threshold
        } else {
            10.0 * tolerance
        },
        passed: true,
    }
}

/// `∫_{S^d} Π x_k^{α_k} dσ_d` for the normalized measure:
/// zero if any exponent is odd, else
/// `Γ((d+1)/2) Π Γ((α_k+1)/2) / (π^{(d+1)/2} Γ((|α|+d+1)/2))`.
pub fn monomial_integral(alpha: &[usize]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let m = alpha.len() as f64;
    let total: usize = alpha.iter().sum();
    let log_num: f64 = alpha
        .iter()
        .map(|&a| ln_gamma((a as f64 + 1.0) / 2.0))
        .sum();
    let log_v = ln_gamma(m / 2.0) + log_num
        - 0.5 * m * std::f64::consts::PI.ln()
        - ln_gamma((total as f64 + m) / 2.0);
    log_v.exp()
}
