//! Discrete logarithmic and Riesz energies, the continuous log energy of the
//! uniform measure, and the head/tail decomposition of discrete energies.
//!
//! Conventions follow the usual sums over ordered pairs `i != j`:
//! `E_log = Σ log 1/|x_i - x_j|` (no factor 1/2) and
//! `E_s = (1/2) Σ |x_i - x_j|^{-s}`.

mod sum;

pub use sum::{
    sum_rows, sum_rows_scalar, with_threads, CompensatedSum, SumOptions, DEFAULT_PARTITIONS,
};

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geom::{min_separation, PointSet};
use crate::jacobi::{riesz_coefficients, KernelCoefficients};
use crate::quadrature::{self, ZonalArg};

pub use crate::jacobi::KernelKind as EnergyKind;

/// How an energy value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EnergyMethod {
    Direct,
    KernelSplit { lambda: f64, t: usize, nmax: usize },
}

impl EnergyMethod {
    fn label(&self) -> String {
        match self {
            EnergyMethod::Direct => "direct".into(),
            EnergyMethod::KernelSplit { lambda, t, nmax } => {
                format!("kernel_split(lambda={lambda},t={t},nmax={nmax})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    #[serde(flatten)]
    pub kind: EnergyKind,
    pub value: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub method: EnergyMethod,
    pub deterministic: bool,
    pub min_separation: f64,
}

impl EnergyReport {
    pub const CSV_HEADER: [&'static str; 7] =
        ["N", "d", "kind", "s", "value", "min_separation", "method"];

    /// One CSV row in [`Self::CSV_HEADER`] order; `s` is empty for the log kind.
    pub fn csv_record(&self) -> Vec<String> {
        let (kind, s) = kind_fields(&self.kind);
        vec![
            self.n.to_string(),
            self.d.to_string(),
            kind,
            s,
            self.value.to_string(),
            self.min_separation.to_string(),
            self.method.label(),
        ]
    }
}

pub(crate) fn kind_fields(kind: &EnergyKind) -> (String, String) {
    match kind {
        EnergyKind::Log => ("log".into(), String::new()),
        EnergyKind::Riesz { s } => ("riesz".into(), s.to_string()),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyOptions {
    pub sum: SumOptions,
    /// Accept `N = 1` and report the empty sum 0 instead of failing.
    pub allow_empty: bool,
}

impl EnergyOptions {
    pub fn deterministic() -> Self {
        Self {
            sum: SumOptions::deterministic(),
            ..Self::default()
        }
    }
}

/// Either energy, by kind.
pub fn energy(points: &PointSet, kind: EnergyKind, opts: EnergyOptions) -> Result<EnergyReport> {
    match kind {
        EnergyKind::Log => log_energy(points, opts),
        EnergyKind::Riesz { s } => riesz_energy(points, s, opts),
    }
}

/// Validates the point count and returns the minimum separation, rejecting
/// coincident points. `None` means the empty-sum case was allowed.
fn check_pairs(points: &PointSet, opts: EnergyOptions) -> Result<Option<f64>> {
    if points.len() < 2 {
        if opts.allow_empty {
            return Ok(None);
        }
        return Err(invalid("energy of fewer than two points is an empty sum"));
    }
    let sep = min_separation(points)?;
    if sep == 0.0 {
        return Err(Error::Singular(duplicate_message(points)));
    }
    Ok(Some(sep))
}

fn duplicate_message(points: &PointSet) -> String {
    let n = points.len();
    for i in 0..n {
        for j in i + 1..n {
            if points.dist_sq(i, j) == 0.0 {
                return format!("points {} and {} coincide", i + 1, j + 1);
            }
        }
    }
    "coincident points".into()
}

fn report(
    points: &PointSet,
    kind: EnergyKind,
    value: f64,
    sep: f64,
    opts: EnergyOptions,
) -> EnergyReport {
    EnergyReport {
        kind,
        value,
        n: points.len(),
        d: points.d(),
        method: EnergyMethod::Direct,
        deterministic: opts.sum.deterministic,
        min_separation: sep,
    }
}

/// `Σ_{i != j} log 1/|x_i - x_j|`.
pub fn log_energy(points: &PointSet, opts: EnergyOptions) -> Result<EnergyReport> {
    let Some(sep) = check_pairs(points, opts)? else {
        return Ok(report(points, EnergyKind::Log, 0.0, 0.0, opts));
    };
    let n = points.len();
    // each unordered pair counts twice: 2 · (-1/2) log |x - y|² = -log |x - y|²
    let value = sum_rows_scalar(n, opts.sum, |i, acc| {
        let xi = points.point(i);
        for j in i + 1..n {
            acc.add(-crate::geom::dist_sq(xi, points.point(j)).ln());
        }
    });
    Ok(report(points, EnergyKind::Log, value, sep, opts))
}

/// `(1/2) Σ_{i != j} |x_i - x_j|^{-s}`.
pub fn riesz_energy(points: &PointSet, s: f64, opts: EnergyOptions) -> Result<EnergyReport> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(invalid(format!(
            "Riesz exponent s must be positive, got {s}"
        )));
    }
    let kind = EnergyKind::Riesz { s };
    let Some(sep) = check_pairs(points, opts)? else {
        return Ok(report(points, kind, 0.0, 0.0, opts));
    };
    let n = points.len();
    let half_s = -0.5 * s;
    let value = sum_rows_scalar(n, opts.sum, |i, acc| {
        let xi = points.point(i);
        for j in i + 1..n {
            acc.add(crate::geom::dist_sq(xi, points.point(j)).powf(half_s));
        }
    });
    Ok(report(points, kind, value, sep, opts))
}

/// The log energy written through inner products,
/// `(1/2) Σ_{i != j} (log 1/(1 - <x_i, x_j>) - log 2)`.
///
/// Mathematically identical to [`log_energy`]; evaluated independently as a
/// cross-check.
pub fn log_energy_from_inner_products(points: &PointSet, opts: SumOptions) -> Result<f64> {
    let n = points.len();
    if n < 2 {
        return Err(invalid("energy of fewer than two points is an empty sum"));
    }
    let v = sum_rows_scalar(n, opts, |i, acc| {
        for j in i + 1..n {
            acc.add(-(1.0 - points.inner(i, j)).ln());
        }
    });
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(v - pairs * LN_2)
}

/// `∬ log 1/|x - y| dσ_d(x) dσ_d(y)` for the normalized surface measure,
/// by zonal quadrature of `-(1/2) log(2(1 - t))`.
pub fn continuous_log_energy(d: usize) -> Result<f64> {
    let r =
        quadrature::zonal_integral_with(|z: ZonalArg| -0.5 * (2.0 * z.one_minus_t).ln(), d, 1e-13)?;
    Ok(r.value)
}

/// Discrete energy split by the Jacobi series of its kernel at degree `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitEnergy {
    pub head: f64,
    pub tail: f64,
    /// Size of the largest pair tail remainder beyond `nmax`, multiplied by
    /// the pair count and the kernel scaling.
    pub truncation_estimate: f64,
}

impl SplitEnergy {
    pub fn total(&self) -> f64 {
        self.head + self.tail
    }
}

/// Splits the energy of `points` into the contribution of the series head
/// (polynomial degree `<= t`) and the tail (degrees `t+1 ..= nmax`).
///
/// With `x = <x_i, x_j>`:
/// Riesz: `E_s = Σ_{i<j} 2^{-s/2} (1 - x)^{-s/2}`;
/// log: `E_log = Σ_{i<j} log 1/(1 - x) - (N² - N)/2 · log 2`, the constant
/// sitting in the head.
pub fn kernel_split_energy(
    points: &PointSet,
    coeffs: &KernelCoefficients,
    t: usize,
    opts: SumOptions,
) -> Result<SplitEnergy> {
    let n = points.len();
    if n < 2 {
        return Err(invalid("energy of fewer than two points is an empty sum"));
    }
    if coeffs.d() != points.d() {
        return Err(invalid(format!(
            "kernel table is for d = {}, point set has d = {}",
            coeffs.d(),
            points.d()
        )));
    }
    if t > coeffs.nmax() {
        return Err(invalid(format!(
            "split degree t = {t} exceeds nmax = {}",
            coeffs.nmax()
        )));
    }
    let mut worst_tail_point = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let x = points.inner(i, j);
            if x <= -1.0 + 1e-14 {
                return Err(Error::AntipodalPair {
                    i: i + 1,
                    j: j + 1,
                    inner: x,
                });
            }
            if points.dist_sq(i, j) == 0.0 || x >= 1.0 {
                return Err(Error::Singular(format!(
                    "points {} and {} coincide",
                    i + 1,
                    j + 1
                )));
            }
            worst_tail_point = worst_tail_point.max(x.abs());
        }
    }
    let nmax = coeffs.nmax();
    let sums = sum_rows(n, 2, opts, |i, acc| {
        let mut basis = vec![0.0; nmax + 1];
        let xi = points.point(i);
        for j in i + 1..n {
            let x = crate::geom::dot(xi, points.point(j));
            let (h, t) = coeffs.split_with(t, x, &mut basis);
            acc[0].add(h);
            acc[1].add(t);
        }
    });
    let pairs = (n * (n - 1) / 2) as f64;
    let remainder = coeffs
        .tail_with_estimate(t, worst_tail_point)?
        .remainder_estimate;
    let (scale, offset) = match coeffs.kind() {
        EnergyKind::Riesz { s } => ((-0.5 * s * LN_2).exp(), 0.0),
        EnergyKind::Log => (1.0, -pairs * LN_2),
    };
    Ok(SplitEnergy {
        head: scale * sums[0] + offset,
        tail: scale * sums[1],
        truncation_estimate: scale * pairs * remainder,
    })
}

/// Both sides of the equal-weight quadrature identity for the Riesz head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadIdentity {
    /// `(1/N²) Σ_{i,j} H_{s,t}(<x_i, x_j>)`, diagonal included.
    pub discrete_mean: f64,
    /// `∫ H_{s,t}(<x, y>) dσ_d(x)`.
    pub integral: f64,
}

impl HeadIdentity {
    pub fn relative_error(&self) -> f64 {
        ((self.discrete_mean - self.integral) / self.integral).abs()
    }
}

/// Evaluates both sides of the identity that holds exactly when `points` is
/// a `t`-design: the equal-weight mean of the degree-`t` Riesz head over all
/// ordered pairs equals its integral. `λ` defaults to `s + 2`.
pub fn head_quadrature_identity(
    points: &PointSet,
    s: f64,
    lambda: Option<f64>,
    t: usize,
    opts: SumOptions,
) -> Result<HeadIdentity> {
    let d = points.d();
    let lambda = lambda.unwrap_or(s + 2.0);
    let coeffs = riesz_coefficients(s, lambda, d, t)?;
    let integral = crate::jacobi::head_integral(s, lambda, d, t)?;
    let n = points.len();
    let off_diag = sum_rows_scalar(n, opts, |i, acc| {
        let mut basis = vec![0.0; t + 1];
        let xi = points.point(i);
        for j in i + 1..n {
            let x = crate::geom::dot(xi, points.point(j)).clamp(-1.0, 1.0);
            acc.add(coeffs.split_with(t, x, &mut basis).0);
        }
    });
    let diag = coeffs.head(t, 1.0)?;
    let scale = (-0.5 * s * LN_2).exp();
    let nf = n as f64;
    let mut total = CompensatedSum::default();
    total.add(2.0 * off_diag);
    total.add(nf * diag);
    Ok(HeadIdentity {
        discrete_mean: scale * total.value() / (nf * nf),
        integral,
    })
}
