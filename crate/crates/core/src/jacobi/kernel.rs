//! Jacobi-series expansions of the Riesz and logarithmic kernels and their
//! head/tail split.
//!
//! Riesz kind: for `-1 < x < 1` and `λ > s - 1`,
//!
//! ```text
//! (1 - x)^{-s/2} = Σ_n a_n P_n^{(λ-1/2, λ-1/2)}(x),
//! a_n = 2^{2λ-s/2} π^{-1/2} Γ(λ) Γ(λ-s/2+1/2)
//!       · (n+λ) (s/2)_n (2λ)_n / (Γ(n+2λ-s/2+1) (λ+1/2)_n).
//! ```
//!
//! Log kind: integrating the `s = 2` series term by term from 0 gives
//!
//! ```text
//! log 1/(1 - x) = C + Σ_n b_n P_{n+1}^{(λ-3/2, λ-3/2)}(x),
//! b_n = 2^{2λ} π^{-1/2} Γ(λ) Γ(λ-1/2) (n+λ) n! (2λ)_n / ((n+2λ-1) Γ(n+2λ) (λ+1/2)_n),
//! C   = -Σ_n b_n P_{n+1}^{(λ-3/2, λ-3/2)}(0).
//! ```
//!
//! `nmax` is always the highest polynomial degree kept, so a log series with
//! `nmax` stores `b_0 .. b_{nmax-1}`.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::{jacobi_fill, pochhammer_log, JacobiParams};
use crate::energy::CompensatedSum;
use crate::error::{invalid, Result};

/// Which kernel a coefficient table expands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelKind {
    /// `(1 - x)^{-s/2}`
    Riesz { s: f64 },
    /// `log 1/(1 - x)`
    Log,
}

impl KernelKind {
    /// `λ = s + 2` for Riesz, `λ = d + 3` for log.
    pub fn default_lambda(&self, d: usize) -> f64 {
        match *self {
            KernelKind::Riesz { s } => s + 2.0,
            KernelKind::Log => d as f64 + 3.0,
        }
    }

    /// Closed-form kernel value at an interior `x`.
    pub fn exact(&self, x: f64) -> f64 {
        match *self {
            KernelKind::Riesz { s } => (1.0 - x).powf(-0.5 * s),
            KernelKind::Log => -(1.0 - x).ln(),
        }
    }
}

/// A value computed from a truncated series together with an estimate of the
/// part of the series beyond the truncation degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub remainder_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCoefficients {
    #[serde(flatten)]
    kind: KernelKind,
    lambda: f64,
    d: usize,
    nmax: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constant_term: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constant_truncation_estimate: Option<f64>,
    coefficients: Vec<f64>,
}

/// Coefficient table for either kernel kind.
pub fn kernel_coefficients(
    kind: KernelKind,
    lambda: f64,
    d: usize,
    nmax: usize,
) -> Result<KernelCoefficients> {
    match kind {
        KernelKind::Riesz { s } => riesz_coefficients(s, lambda, d, nmax),
        KernelKind::Log => log_coefficients(lambda, d, nmax),
    }
}

/// Coefficients of `(1 - x)^{-s/2}` in the basis `P_n^{(λ-1/2, λ-1/2)}`, `n <= nmax`.
pub fn riesz_coefficients(
    s: f64,
    lambda: f64,
    d: usize,
    nmax: usize,
) -> Result<KernelCoefficients> {
    if d < 2 {
        return Err(invalid(format!("sphere dimension d = {d} must be >= 2")));
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(invalid(format!(
            "Riesz exponent s must be positive, got {s}"
        )));
    }
    if !(lambda > s - 1.0) || !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!(
            "Riesz expansion requires lambda > s - 1 = {} (and lambda > 0), got {lambda}",
            s - 1.0
        )));
    }
    let half_s = 0.5 * s;
    let log_prefactor = (2.0 * lambda - half_s) * LN_2 - 0.5 * PI.ln()
        + ln_gamma(lambda)
        + ln_gamma(lambda - half_s + 0.5)
        - ln_gamma(2.0 * lambda - half_s + 1.0);
    let coefficients = (0..=nmax)
        .map(|n| {
            let nf = n as f64;
            let log_a = log_prefactor
                + (nf + lambda).ln()
                + pochhammer_log(half_s, n)?
                + pochhammer_log(2.0 * lambda, n)?
                - pochhammer_log(2.0 * lambda - half_s + 1.0, n)?
                - pochhammer_log(lambda + 0.5, n)?;
            Ok(log_a.exp())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelCoefficients {
        kind: KernelKind::Riesz { s },
        lambda,
        d,
        nmax,
        constant_term: None,
        constant_truncation_estimate: None,
        coefficients,
    })
}

/// Coefficients of `log 1/(1 - x)` in the basis `P_{n+1}^{(λ-3/2, λ-3/2)}`,
/// degrees `1 ..= nmax`, plus the constant that makes the series vanish at 0.
pub fn log_coefficients(lambda: f64, d: usize, nmax: usize) -> Result<KernelCoefficients> {
    if d < 2 {
        return Err(invalid(format!("sphere dimension d = {d} must be >= 2")));
    }
    if !(lambda > d as f64 + 1.0) || !lambda.is_finite() {
        return Err(invalid(format!(
            "log expansion requires lambda > d + 1 = {}, got {lambda}",
            d + 1
        )));
    }
    if nmax == 0 {
        return Err(invalid("log expansion needs nmax >= 1"));
    }
    let log_prefactor =
        2.0 * lambda * LN_2 - 0.5 * PI.ln() + ln_gamma(lambda) + ln_gamma(lambda - 0.5);
    let coefficients = (0..nmax)
        .map(|n| {
            let nf = n as f64;
            // n! (2λ)_n / Γ(n+2λ) = n! / Γ(2λ)
            let log_b = log_prefactor + (nf + lambda).ln() + pochhammer_log(1.0, n)?
                - (nf + 2.0 * lambda - 1.0).ln()
                - ln_gamma(2.0 * lambda)
                - pochhammer_log(lambda + 0.5, n)?;
            Ok(log_b.exp())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = KernelCoefficients {
        kind: KernelKind::Log,
        lambda,
        d,
        nmax,
        constant_term: None,
        constant_truncation_estimate: None,
        coefficients,
    };
    let at_zero = table.terms(0.0);
    let constant = -neumaier(&at_zero);
    table.constant_term = Some(constant);
    table.constant_truncation_estimate = Some(dyadic_remainder(&at_zero));
    Ok(table)
}

impl KernelCoefficients {
    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Zero for the Riesz kind.
    pub fn constant_term(&self) -> f64 {
        self.constant_term.unwrap_or(0.0)
    }

    /// Estimated contribution of the discarded terms to the log constant.
    pub fn constant_truncation_estimate(&self) -> f64 {
        self.constant_truncation_estimate.unwrap_or(0.0)
    }

    /// Jacobi family of the basis polynomials.
    pub fn basis(&self) -> JacobiParams {
        let a = match self.kind {
            KernelKind::Riesz { .. } => self.lambda - 0.5,
            KernelKind::Log => self.lambda - 1.5,
        };
        JacobiParams::symmetric(a).expect("lambda validated at construction")
    }

    /// Polynomial degree carried by coefficient index `n`.
    pub fn basis_degree(&self, n: usize) -> usize {
        match self.kind {
            KernelKind::Riesz { .. } => n,
            KernelKind::Log => n + 1,
        }
    }

    /// Number of coefficients whose basis degree is at most `t`.
    fn head_len(&self, t: usize) -> usize {
        match self.kind {
            KernelKind::Riesz { .. } => t + 1,
            KernelKind::Log => t,
        }
    }

    /// Individual series terms `a_n P_{deg(n)}(x)`, constant excluded.
    pub fn terms(&self, x: f64) -> Vec<f64> {
        let mut basis = vec![0.0; self.nmax + 1];
        jacobi_fill(self.basis(), x, &mut basis);
        self.coefficients
            .iter()
            .enumerate()
            .map(|(n, a)| a * basis[self.basis_degree(n)])
            .collect()
    }

    fn check_degree(&self, t: usize) -> Result<()> {
        if t > self.nmax {
            return Err(invalid(format!(
                "split degree t = {t} exceeds the stored truncation nmax = {}",
                self.nmax
            )));
        }
        Ok(())
    }

    /// Head of the series: every term of polynomial degree `<= t` (and the
    /// constant for the log kind). `|x| <= 1`.
    pub fn head(&self, t: usize, x: f64) -> Result<f64> {
        self.check_degree(t)?;
        if !(x.abs() <= 1.0) {
            return Err(invalid(format!(
                "head argument must lie in [-1, 1], got {x}"
            )));
        }
        let terms = self.terms(x);
        Ok(self.constant_term() + neumaier(&terms[..self.head_len(t)]))
    }

    /// Tail of the series: degrees `t < deg <= nmax`, for interior `x`.
    pub fn tail(&self, t: usize, x: f64) -> Result<f64> {
        Ok(self.tail_with_estimate(t, x)?.value)
    }

    /// Tail together with the estimated remainder beyond `nmax`.
    pub fn tail_with_estimate(&self, t: usize, x: f64) -> Result<SeriesValue> {
        self.check_degree(t)?;
        if !(x.abs() < 1.0) {
            return Err(invalid(format!(
                "tail is only defined on the open interval (-1, 1), got {x}"
            )));
        }
        let terms = self.terms(x);
        Ok(SeriesValue {
            value: neumaier(&terms[self.head_len(t)..]),
            remainder_estimate: dyadic_remainder(&terms),
        })
    }

    /// Full truncated series at `x` with its remainder estimate.
    pub fn partial_sum(&self, x: f64) -> Result<SeriesValue> {
        if !(x.abs() < 1.0) {
            return Err(invalid(format!(
                "series only converges on (-1, 1), got {x}"
            )));
        }
        let terms = self.terms(x);
        Ok(SeriesValue {
            value: self.constant_term() + neumaier(&terms),
            remainder_estimate: dyadic_remainder(&terms) + self.constant_truncation_estimate(),
        })
    }

    /// Head (constant included) and tail at `x` from a single basis sweep.
    /// `basis` is scratch space of length at least `nmax + 1`; no argument
    /// checks, callers validate `t` and `x`.
    pub(crate) fn split_with(&self, t: usize, x: f64, basis: &mut [f64]) -> (f64, f64) {
        let basis = &mut basis[..self.nmax + 1];
        jacobi_fill(self.basis(), x, basis);
        let shift = self.basis_degree(0);
        let split = self.head_len(t);
        let mut head = CompensatedSum::default();
        head.add(self.constant_term());
        let mut tail = CompensatedSum::default();
        for (n, a) in self.coefficients.iter().enumerate() {
            let v = a * basis[n + shift];
            if n < split {
                head.add(v);
            } else {
                tail.add(v);
            }
        }
        (head.value(), tail.value())
    }

    /// `∫_{S^d} head_t(<x, y>) dσ_d(x)` from the zonal integrals of the
    /// individual basis polynomials.
    pub fn head_zonal_mean(&self, t: usize) -> Result<f64> {
        self.check_degree(t)?;
        let basis_lambda = self.basis().alpha() + 0.5;
        let mut acc = vec![self.constant_term()];
        for n in 0..self.head_len(t) {
            let deg = self.basis_degree(n);
            acc.push(self.coefficients[n] * zonal_jacobi_integral(deg, basis_lambda, self.d)?);
        }
        Ok(neumaier(&acc))
    }
}

/// `∫_{S^d} P_m^{(λ-1/2, λ-1/2)}(<x, y>) dσ_d(x)`: zero at odd `m`, and for
/// `m = 2k` equal to
/// `(λ+1/2)_m / (2λ)_m · (λ)_k (λ-d/2+1/2)_k / ((d/2+1/2)_k k!)`.
pub fn zonal_jacobi_integral(m: usize, lambda: f64, d: usize) -> Result<f64> {
    let half_d = 0.5 * d as f64;
    if !(lambda > half_d - 0.5) {
        return Err(invalid(format!(
            "zonal Jacobi integral needs lambda > d/2 - 1/2 = {}, got {lambda}",
            half_d - 0.5
        )));
    }
    if m % 2 == 1 {
        return Ok(0.0);
    }
    let k = m / 2;
    let log_v = pochhammer_log(lambda + 0.5, m)? - pochhammer_log(2.0 * lambda, m)?
        + pochhammer_log(lambda, k)?
        + pochhammer_log(lambda - half_d + 0.5, k)?
        - pochhammer_log(half_d + 0.5, k)?
        - pochhammer_log(1.0, k)?;
    Ok(log_v.exp())
}

/// Closed form of `∫_{S^d} H_{s,t}(<x, y>) dσ_d(x)`, where `H_{s,t}` is the
/// degree-`t` head of the expansion of `|x - y|^{-s} = 2^{-s/2} (1 - <x,y>)^{-s/2}`:
///
/// ```text
/// 2^{2λ-s} π^{-1/2} Γ(λ) Γ(λ-s/2+1/2)
///   Σ_{n=0}^{⌊t/2⌋} (2n+λ) (s/2)_{2n} / Γ(2n+2λ-s/2+1)
///                   · (λ)_n (λ-d/2+1/2)_n / ((d/2+1/2)_n n!)
/// ```
pub fn head_integral(s: f64, lambda: f64, d: usize, t: usize) -> Result<f64> {
    if d < 2 {
        return Err(invalid(format!("sphere dimension d = {d} must be >= 2")));
    }
    let half_s = 0.5 * s;
    let half_d = 0.5 * d as f64;
    if !(s > 0.0) {
        return Err(invalid(format!(
            "Riesz exponent s must be positive, got {s}"
        )));
    }
    if !(lambda > s - 1.0) || !(lambda > half_d - 0.5) || !(lambda > 0.0) {
        return Err(invalid(format!(
            "head integral requires lambda > s - 1 and lambda > d/2 - 1/2, got lambda = {lambda}"
        )));
    }
    let log_prefactor = (2.0 * lambda - s) * LN_2 - 0.5 * PI.ln()
        + ln_gamma(lambda)
        + ln_gamma(lambda - half_s + 0.5)
        - ln_gamma(2.0 * lambda - half_s + 1.0);
    let terms = (0..=t / 2)
        .map(|n| {
            let nf = n as f64;
            let log_term = (2.0 * nf + lambda).ln() + pochhammer_log(half_s, 2 * n)?
                - pochhammer_log(2.0 * lambda - half_s + 1.0, 2 * n)?
                + pochhammer_log(lambda, n)?
                + pochhammer_log(lambda - half_d + 0.5, n)?
                - pochhammer_log(half_d + 0.5, n)?
                - pochhammer_log(1.0, n)?;
            Ok((log_prefactor + log_term).exp())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(neumaier(&terms))
}

fn neumaier(values: &[f64]) -> f64 {
    values.iter().copied().collect::<CompensatedSum>().value()
}

/// Remainder estimate for a series truncated after `terms`: the absolute
/// mass of the last two dyadic blocks is extrapolated as a geometric series.
fn dyadic_remainder(terms: &[f64]) -> f64 {
    let m = terms.len();
    if m < 8 {
        return terms.last().map_or(0.0, |v| v.abs());
    }
    let block = |lo: usize, hi: usize| terms[lo..hi].iter().map(|v| v.abs()).sum::<f64>();
    let older = block(m / 4, m / 2);
    let newer = block(m / 2, m);
    if older == 0.0 {
        return newer;
    }
    let q = newer / older;
    if q < 1.0 {
        newer * q / (1.0 - q)
    } else {
        newer
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn riesz_rejects_hypothesis_violation() {
        assert!(riesz_coefficients(2.0, 1.0, 2, 10).is_err());
        assert!(riesz_coefficients(4.0, 2.5, 2, 10).is_err());
        assert!(riesz_coefficients(-1.0, 4.0, 2, 10).is_err());
        assert!(riesz_coefficients(2.0, 1.5, 2, 10).is_ok());
    }

    #[test]
    fn log_rejects_small_lambda() {
        assert!(log_coefficients(3.0, 2, 10).is_err());
        assert!(log_coefficients(4.0, 3, 10).is_err());
        assert!(log_coefficients(5.0, 2, 0).is_err());
        assert!(log_coefficients(3.5, 2, 10).is_ok());
    }

    #[test]
    fn split_degree_beyond_nmax_rejected() {
        let k = riesz_coefficients(2.0, 4.0, 2, 10).unwrap();
        assert!(k.head(11, 0.0).is_err());
        assert!(k.tail(11, 0.0).is_err());
        assert!(k.tail(3, 1.0).is_err());
        assert!(k.head(3, 1.0).is_ok());
    }

    #[test]
    fn full_head_has_empty_tail() {
        for k in [
            riesz_coefficients(3.0, 5.0, 2, 40).unwrap(),
            log_coefficients(5.0, 2, 40).unwrap(),
        ] {
            let full = k.partial_sum(0.3).unwrap().value;
            assert_relative_eq!(k.head(40, 0.3).unwrap(), full, max_relative = 1e-15);
            assert_eq!(k.tail(40, 0.3).unwrap(), 0.0);
        }
    }

    #[test]
    fn log_series_vanishes_at_zero() {
        let k = log_coefficients(5.0, 2, 300).unwrap();
        assert!(k.partial_sum(0.0).unwrap().value.abs() < 1e-14);
        // degree-0 head is just the constant
        assert_eq!(k.head(0, 0.7).unwrap(), k.constant_term());
    }

    #[test]
    fn s2_coefficients_match_factorial_form() {
        // s = 2, λ = 4: (1)_n = n!, Γ(n+2λ) = Γ(8)(8)_n and the gamma prefactor
        // 2^7 π^{-1/2} Γ(4) Γ(7/2) / Γ(8) collapses to 2/7, so
        // a_n = (2/7)(n+4) n! / (9/2)_n, by plain products.
        let k = riesz_coefficients(2.0, 4.0, 2, 20).unwrap();
        let mut ratio = 1.0; // n! / (9/2)_n
        for n in 0..=20usize {
            if n > 0 {
                ratio *= n as f64 / (3.5 + n as f64);
            }
            let expect = 2.0 / 7.0 * (n as f64 + 4.0) * ratio;
            assert_relative_eq!(k.coefficients()[n], expect, max_relative = 1e-13);
        }
    }

    #[test]
    fn zonal_jacobi_integral_odd_degrees_vanish() {
        for m in (1..40).step_by(2) {
            assert_eq!(zonal_jacobi_integral(m, 4.0, 3).unwrap(), 0.0);
        }
        assert_relative_eq!(
            zonal_jacobi_integral(0, 4.0, 3).unwrap(),
            1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn gegenbauer_basis_matching_sphere_integrates_to_zero() {
        // λ = d/2 - 1/2 + ε approaches the sphere's own family, whose integrals vanish for m >= 1.
        let d = 3;
        let v = zonal_jacobi_integral(4, 1.0 + 1e-9, d).unwrap();
        assert!(v.abs() < 1e-8, "{v}");
    }

    #[test]
    fn head_integral_degree_zero_is_scaled_constant_coefficient() {
        for &(s, lambda, d) in &[(2.0, 4.0, 2usize), (3.0, 5.0, 3), (2.5, 4.5, 2)] {
            let k = riesz_coefficients(s, lambda, d, 0).unwrap();
            let expect = 2f64.powf(-0.5 * s) * k.coefficients()[0];
            assert_relative_eq!(
                head_integral(s, lambda, d, 0).unwrap(),
                expect,
                max_relative = 1e-14
            );
            assert_relative_eq!(
                head_integral(s, lambda, d, 1).unwrap(),
                expect,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn closed_form_head_integral_matches_termwise_route() {
        for &(s, d) in &[(2.0, 2usize), (3.0, 2), (2.0, 3), (3.0, 3)] {
            let lambda = s + 2.0;
            let k = riesz_coefficients(s, lambda, d, 40).unwrap();
            for t in [0usize, 1, 5, 12, 40] {
                let termwise = 2f64.powf(-0.5 * s) * k.head_zonal_mean(t).unwrap();
                let closed = head_integral(s, lambda, d, t).unwrap();
                assert_relative_eq!(closed, termwise, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn serde_shape() {
        let k = log_coefficients(5.0, 2, 4).unwrap();
        let v: serde_json::Value = serde_json::to_value(&k).unwrap();
        assert_eq!(v["kind"], "log");
        assert!(v.get("s").is_none());
        assert!(v.get("constant_term").is_some());
        assert_eq!(v["coefficients"].as_array().unwrap().len(), 4);
        let k = riesz_coefficients(2.0, 4.0, 2, 4).unwrap();
        let v: serde_json::Value = serde_json::to_value(&k).unwrap();
        assert_eq!(v["kind"], "riesz");
        assert_eq!(v["s"], 2.0);
        assert!(v.get("constant_term").is_none());
        let back: KernelCoefficients = serde_json::from_value(v).unwrap();
        assert_eq!(back, k);
    }
}
