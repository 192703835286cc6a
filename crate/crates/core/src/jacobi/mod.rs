//! Jacobi polynomials and the expansion machinery built on them.
//!
//! Everything here works with the standard normalization
//! `P_n^{(α,β)}(1) = binom(n + α, n)`. Coefficient products that involve
//! gamma functions of large arguments are formed in log space; `Γ(n + 2λ)`
//! overflows a double near `n ≈ 170`.

mod kernel;

pub use kernel::{
    head_integral, kernel_coefficients, log_coefficients, riesz_coefficients,
    zonal_jacobi_integral, KernelCoefficients, KernelKind, SeriesValue,
};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};

/// Parameters `(α, β)` of a Jacobi family; both must exceed -1 so the weight
/// `(1 - x)^α (1 + x)^β` is integrable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(invalid(format!(
                "Jacobi parameters must exceed -1, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Symmetric (Gegenbauer) family `α = β`.
    pub fn symmetric(alpha: f64) -> Result<Self> {
        Self::new(alpha, alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Parameters of the derivative family `(α + 1, β + 1)`.
    pub fn shifted(&self) -> Self {
        Self {
            alpha: self.alpha + 1.0,
            beta: self.beta + 1.0,
        }
    }
}

/// `log (a)_n = log Γ(n + a) - log Γ(a)` for `a > 0`.
///
/// Negative `a` would cross gamma poles; use [`pochhammer`] for those.
pub fn pochhammer_log(a: f64, n: usize) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(invalid(format!("pochhammer_log needs a > 0, got {a}")));
    }
    if n == 0 {
        return Ok(0.0);
    }
    if n <= DIRECT_LOG_SUM_MAX {
        // log-gamma differences lose a few ulps to cancellation; a short
        // compensated sum of logs is accurate to ~1 ulp
        let acc: crate::energy::CompensatedSum = (0..n).map(|k| (a + k as f64).ln()).collect();
        return Ok(acc.value());
    }
    Ok(ln_gamma(n as f64 + a) - ln_gamma(a))
}

const DIRECT_LOG_SUM_MAX: usize = 256;

/// Rising factorial `a (a + 1) ... (a + n - 1)` by direct product, for any real `a`.
pub fn pochhammer(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (a + k as f64))
}

/// `Γ(n + a) / Γ(n + b)` through log-gamma.
pub fn gamma_ratio(n: usize, a: f64, b: f64) -> Result<f64> {
    let na = n as f64 + a;
    let nb = n as f64 + b;
    if !(na > 0.0 && nb > 0.0) {
        return Err(invalid(format!(
            "gamma_ratio arguments must be positive, got n + a = {na}, n + b = {nb}"
        )));
    }
    Ok((ln_gamma(na) - ln_gamma(nb)).exp())
}

fn check_unit_interval(x: f64) -> Result<()> {
    if !(x.abs() <= 1.0) {
        return Err(invalid(format!(
            "Jacobi argument must lie in [-1, 1], got {x}"
        )));
    }
    Ok(())
}

/// Forward three-term recurrence writing `P_0 .. P_nmax` at `x` into `out`.
pub(crate) fn jacobi_fill(params: JacobiParams, x: f64, out: &mut [f64]) {
    let (a, b) = (params.alpha, params.beta);
    let Some(first) = out.first_mut() else {
        return;
    };
    *first = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
    let ab = a + b;
    let ab_sq = a * a - b * b;
    for n in 1..out.len() - 1 {
        let nf = n as f64;
        let s = 2.0 * nf + ab;
        let lead = 2.0 * (nf + 1.0) * (nf + ab + 1.0) * s;
        let c1 = (s + 1.0) * ((s + 2.0) * s * x + ab_sq);
        let c2 = 2.0 * (nf + a) * (nf + b) * (s + 2.0);
        out[n + 1] = (c1 * out[n] - c2 * out[n - 1]) / lead;
    }
}

/// `P_n^{(α,β)}(x)` for `|x| <= 1`.
pub fn jacobi_eval(n: usize, params: JacobiParams, x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    let mut buf = vec![0.0; n + 1];
    jacobi_fill(params, x, &mut buf);
    Ok(buf[n])
}

/// All degrees `0 ..= nmax` at `x` from one recurrence sweep.
pub fn jacobi_batch(nmax: usize, params: JacobiParams, x: f64) -> Result<Vec<f64>> {
    check_unit_interval(x)?;
    let mut buf = vec![0.0; nmax + 1];
    jacobi_fill(params, x, &mut buf);
    Ok(buf)
}

/// `d/dx P_n^{(α,β)}(x) = (α + β + n + 1)/2 · P_{n-1}^{(α+1,β+1)}(x)`.
pub fn jacobi_derivative(n: usize, params: JacobiParams, x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    if n == 0 {
        return Ok(0.0);
    }
    let factor = 0.5 * (params.alpha + params.beta + n as f64 + 1.0);
    Ok(factor * jacobi_eval(n - 1, params.shifted(), x)?)
}

/// `P_n^{(α,β)}(1) = Γ(n + α + 1) / (Γ(α + 1) n!)`.
pub fn jacobi_at_one(n: usize, alpha: f64) -> f64 {
    (ln_gamma(n as f64 + alpha + 1.0) - ln_gamma(alpha + 1.0) - ln_gamma(n as f64 + 1.0)).exp()
}

/// Coefficients `c_k` in
/// `P_n^{(λ-1/2, λ-1/2)} = Σ_k c_k P_{n-2k}^{(d/2-1, d/2-1)}`,
/// returned as `(degree, coefficient)` pairs with decreasing degree.
pub fn connection_expand(n: usize, lambda: f64, d: usize) -> Result<Vec<(usize, f64)>> {
    if d < 2 {
        return Err(invalid(format!("sphere dimension d = {d} must be >= 2")));
    }
    let df = d as f64;
    if !(lambda > 0.5 * df - 0.5) {
        return Err(invalid(format!(
            "connection formula needs lambda > d/2 - 1/2 = {}, got {lambda}",
            0.5 * df - 0.5
        )));
    }
    let half_d = 0.5 * df;
    let lead = pochhammer_log(lambda + 0.5, n)? - pochhammer_log(2.0 * lambda, n)?;
    let mut out = Vec::with_capacity(n / 2 + 1);
    for k in 0..=n / 2 {
        let m = n - 2 * k;
        // (λ - d/2 + 1/2)_k is zero for k >= 1 when λ = d/2 - 1/2; excluded above.
        let log_c = lead + pochhammer_log(df - 1.0, m)? - pochhammer_log(half_d, m)?
            + pochhammer_log(lambda, n - k)?
            + pochhammer_log(half_d + 0.5, m)?
            + pochhammer_log(lambda - half_d + 0.5, k)?
            - pochhammer_log(half_d + 0.5, n - k)?
            - pochhammer_log(half_d - 0.5, m)?
            - ln_gamma(k as f64 + 1.0);
        out.push((m, log_c.exp()));
    }
    Ok(out)
}
