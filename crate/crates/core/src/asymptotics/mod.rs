//! Predicted energies of well-separated designs, reference constants for
//! minimal energies, N-sweeps and power-law fits of the remainders.

mod sweep;

pub use sweep::{sweep, PointSource, SweepConfig, SweepItem, SweepRange, SweepRecord};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::energy::{continuous_log_energy, EnergyKind};
use crate::error::{invalid, Error, Result};

/// A second leading coefficient for the same quantity, reported next to the
/// main one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternateForm {
    pub label: String,
    pub leading_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    #[serde(flatten)]
    pub kind: EnergyKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    pub leading_term: f64,
    pub second_term: f64,
    pub predicted: f64,
    pub remainder_order: String,
    /// Only an upper order `≪ leading_term` is known; `predicted` is an
    /// envelope, not a forecast.
    pub bound_only: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternate: Option<AlternateForm>,
}

impl AsymptoticPrediction {
    fn new(
        kind: EnergyKind,
        n: usize,
        d: usize,
        t: Option<usize>,
        leading: f64,
        second: f64,
        order: &str,
    ) -> Self {
        Self {
            kind,
            n,
            d,
            t,
            leading_term: leading,
            second_term: second,
            predicted: leading + second,
            remainder_order: order.into(),
            bound_only: false,
            alternate: None,
        }
    }
}

/// `E_log ≈ N² V_log(d) - (1/d) N log N`, up to `O(N)`.
pub fn predict_log_energy(d: usize, n: usize) -> Result<AsymptoticPrediction> {
    if n < 1 {
        return Err(invalid("need N >= 1"));
    }
    let nf = n as f64;
    let leading = nf * nf * continuous_log_energy(d)?;
    let second = -nf * nf.ln() / d as f64;
    Ok(AsymptoticPrediction::new(
        EnergyKind::Log,
        n,
        d,
        None,
        leading,
        second,
        "O(N)",
    ))
}

/// `H_m = Σ_{n=1}^m 1/n`.
pub fn harmonic_number(m: usize) -> f64 {
    (1..=m).map(|k| 1.0 / k as f64).sum()
}

/// `Γ(d/2 + 1/2) / Γ(d/2)` by the exact step `r(d+2) = (d+1)/d · r(d)` from
/// `r(1) = 1/√π`, `r(2) = √π/2`; the √π factors then cancel exactly in the
/// limit constant for even `d`.
fn gamma_half_ratio(d: usize) -> f64 {
    let (mut r, mut k) = if d.is_multiple_of(2) { (1.0, 2) } else { (1.0, 1) };
    while k < d {
        r *= (k + 1) as f64 / k as f64;
        k += 2;
    }
    if d.is_multiple_of(2) {
        r * PI.sqrt() / 2.0
    } else {
        r / PI.sqrt()
    }
}

/// Riesz energy of a well-separated `t`-design with `N` points.
///
/// `s = d`: `(1/(2√π)) Γ(d/2+1/2)/Γ(d/2) H_{⌊t/2⌋} N²` up to `O(N²)`; on S²
/// the coefficient `(1/4) Σ_{k=0}^t 1/(k+1)` is attached as an alternate.
/// `s > d`: only `E_s ≪ N^{1+s/d}` is known, so the unit-coefficient envelope
/// is returned with `bound_only` set.
pub fn predict_riesz_energy(
    d: usize,
    s: f64,
    n: usize,
    t: Option<usize>,
) -> Result<AsymptoticPrediction> {
    if d < 2 {
        return Err(invalid(format!("sphere dimension d = {d} must be >= 2")));
    }
    if !(s >= d as f64) {
        return Err(invalid(format!(
            "prediction needs s >= d = {d}, got s = {s}"
        )));
    }
    let kind = EnergyKind::Riesz { s };
    let nf = n as f64;
    if s == d as f64 {
        let t = match t {
            Some(t) if t >= 2 => t,
            _ => {
                return Err(invalid(
                    "the s = d prediction needs the design strength t >= 2",
                ))
            }
        };
        let coeff = gamma_half_ratio(d) / (2.0 * PI.sqrt()) * harmonic_number(t / 2);
        let mut p = AsymptoticPrediction::new(kind, n, d, Some(t), coeff * nf * nf, 0.0, "O(N^2)");
        if d == 2 {
            p.alternate = Some(AlternateForm {
                label: "(1/4) sum_{k=0}^{t} 1/(k+1) N^2".into(),
                leading_term: 0.25 * harmonic_number(t + 1) * nf * nf,
            });
        }
        return Ok(p);
    }
    let envelope = nf.powf(1.0 + s / d as f64);
    let mut p = AsymptoticPrediction::new(kind, n, d, t, envelope, 0.0, "—");
    p.bound_only = true;
    Ok(p)
}

/// `lim E_d / (N² log N)` for well-separated designs,
/// `(1/(2d√π)) Γ(d/2+1/2)/Γ(d/2)`.
pub fn limit_constant_s_equals_d(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(invalid(format!("sphere dimension d = {d} must be >= 2")));
    }
    let mut c = 1.0;
    let mut k = if d.is_multiple_of(2) { 2 } else { 1 };
    while k < d {
        c *= (k + 1) as f64 / k as f64;
        k += 2;
    }
    // even d: (√π/2) c / (2d√π) = c/(4d); odd d: c / (√π · 2d√π) = c/(2dπ)
    Ok(if d.is_multiple_of(2) {
        c / (4.0 * d as f64)
    } else {
        c / (2.0 * d as f64 * PI)
    })
}

/// The same limit for minimal `d`-energy in its customary form
/// `(1/(2d)) Γ((d+1)/2) / (Γ(d/2) Γ(1/2))`, evaluated independently.
pub fn kuijlaars_saff_constant(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(invalid(format!("sphere dimension d = {d} must be >= 2")));
    }
    let df = d as f64;
    Ok((ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - ln_gamma(0.5)).exp() / (2.0 * df))
}

/// Unweighted least-squares line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub count: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateFit(
            "need at least two (x, y) pairs".into(),
        ));
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("all abscissae are equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        count: xs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub records: usize,
}

/// Fits `|residual| ≈ e^b N^a` by least squares in log-log space.
/// Pairs with `|residual| < 1e-12 N²` count as numerically zero and are
/// dropped; at least four must remain.
pub fn fit_power_law(pairs: &[(usize, f64)]) -> Result<FitResult> {
    let kept: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(n, r)| r.is_finite() && r.abs() >= 1e-12 * (*n as f64).powi(2) && *n > 0)
        .map(|&(n, r)| ((n as f64).ln(), r.abs().ln()))
        .collect();
    if kept.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "need at least 4 records with nonzero residuals, have {}",
            kept.len()
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = kept.into_iter().unzip();
    let fit = linear_fit(&xs, &ys)?;
    Ok(FitResult {
        exponent: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        records: fit.count,
    })
}

/// [`fit_power_law`] over the successful records of a sweep.
pub fn fit_residual_exponent(records: &[SweepRecord]) -> Result<FitResult> {
    let pairs: Vec<(usize, f64)> = records
        .iter()
        .filter_map(|r| r.residual.map(|res| (r.n, res)))
        .collect();
    fit_power_law(&pairs)
}
