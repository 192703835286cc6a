//! One-dimensional quadrature for zonal functions on the sphere.
//!
//! A zonal function `f(<x, y>)` integrates over the normalized measure on S^d as
//!
//! ```text
//! c_d ∫_{-1}^{1} f(t) (1 - t²)^{d/2 - 1} dt,   c_d = Γ((d+1)/2) / (√π Γ(d/2)).
//! ```
//!
//! Each half of [-1, 1] is mapped to [0, 1] with `1 ∓ t = u²`, which turns the
//! endpoint factor into the smooth `u^{d-1} (2 - u²)^{d/2-1}` and softens
//! logarithmic singularities at `t = ±1`. The mapped integrals are evaluated by
//! adaptive bisection over Gauss–Legendre panels.

use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const PANEL_ORDER: usize = 16;
const MAX_PANELS: usize = 200_000;

/// Default accuracy target for [`zonal_integral`].
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Gauss–Legendre nodes and weights on [-1, 1].
///
/// Nodes come from Newton iteration on the Legendre recurrence, started from
/// the Chebyshev-like guess `cos(π (i + 3/4) / (n + 1/2))`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = panel_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
}

/// Adaptive Gauss–Legendre integration of `f` over `[a, b]`.
///
/// A panel is accepted once its single-panel and two-half-panel values agree
/// to within its width-proportional share of the absolute `tolerance`, or to
/// a few ulps of the panel value.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tolerance: f64,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error_estimate: 0.0,
        });
    }
    let width = b - a;
    let mut stack = vec![(a, b, panel(&f, a, b))];
    let mut value = 0.0;
    let mut compensation = 0.0;
    let mut error = 0.0;
    let mut panels = 0usize;
    while let Some((lo, hi, coarse)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(&f, lo, mid);
        let right = panel(&f, mid, hi);
        let fine = left + right;
        let diff = (fine - coarse).abs();
        let share = tolerance * ((hi - lo) / width).abs();
        panels += 1;
        let resolved =
            diff <= share || diff <= f64::EPSILON * 4.0 * fine.abs() || mid <= lo || mid >= hi;
        if resolved || panels > MAX_PANELS {
            // Neumaier update: panel values span many magnitudes near singular ends.
            let t = value + fine;
            if value.abs() >= fine.abs() {
                compensation += (value - t) + fine;
            } else {
                compensation += (fine - t) + value;
            }
            value = t;
            error += diff;
        } else {
            stack.push((mid, hi, right));
            stack.push((lo, mid, left));
        }
    }
    let value = value + compensation;
    if panels > MAX_PANELS && error > tolerance.max(tolerance * value.abs()) {
        return Err(Error::Quadrature {
            estimate: error,
            target: tolerance,
        });
    }
    Ok(Integral {
        value,
        error_estimate: error,
    })
}

/// Normalization `Γ((d+1)/2) / (√π Γ(d/2))` of the zonal reduction.
pub fn zonal_normalization(d: usize) -> f64 {
    let df = d as f64;
    (ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df)).exp() / std::f64::consts::PI.sqrt()
}

/// Point at which a zonal integrand is sampled: the inner product `t` together
/// with `1 - t` and `1 + t` computed without cancellation.
#[derive(Debug, Clone, Copy)]
pub struct ZonalArg {
    pub t: f64,
    pub one_minus_t: f64,
    pub one_plus_t: f64,
}

/// `∫_{S^d} f(<x, y>) dσ_d(x)` for the normalized surface measure.
///
/// Use [`zonal_integral_with`] when `f` is singular at `t = ±1` and needs an
/// exact `1 ∓ t`.
pub fn zonal_integral<F: Fn(f64) -> f64>(f: F, d: usize) -> Result<Integral> {
    zonal_integral_with(|z: ZonalArg| f(z.t), d, DEFAULT_TOLERANCE)
}

pub fn zonal_integral_with<F: Fn(ZonalArg) -> f64>(
    f: F,
    d: usize,
    tolerance: f64,
) -> Result<Integral> {
    if d < 2 {
        return Err(crate::error::invalid(format!(
            "sphere dimension d = {d} must be >= 2"
        )));
    }
    let c = zonal_normalization(d);
    let half_exp = 0.5 * d as f64 - 1.0;
    let dm1 = (d - 1) as i32;
    let jac = move |u: f64| 2.0 * u.powi(dm1) * (2.0 - u * u).powf(half_exp);
    let upper = integrate_adaptive(
        |u| {
            let u2 = u * u;
            jac(u)
                * f(ZonalArg {
                    t: 1.0 - u2,
                    one_minus_t: u2,
                    one_plus_t: 2.0 - u2,
                })
        },
        0.0,
        1.0,
        tolerance / c,
    )?;
    let lower = integrate_adaptive(
        |u| {
            let u2 = u * u;
            jac(u)
                * f(ZonalArg {
                    t: u2 - 1.0,
                    one_minus_t: 2.0 - u2,
                    one_plus_t: u2,
                })
        },
        0.0,
        1.0,
        tolerance / c,
    )?;
    Ok(Integral {
        value: c * (upper.value + lower.value),
        error_estimate: c * (upper.error_estimate + lower.error_estimate),
    })
}

/// Normalized measure of `{ t ∈ [1 - h, 1] }` under the zonal weight, i.e. the
/// area of a cap of height `h ∈ [0, 2]`.
pub(crate) fn cap_measure_by_height(d: usize, h: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    if h >= 2.0 {
        return 1.0;
    }
    if h > 1.0 {
        return 1.0 - cap_measure_by_height(d, 2.0 - h);
    }
    let c = zonal_normalization(d);
    let half_exp = 0.5 * d as f64 - 1.0;
    let dm1 = (d - 1) as i32;
    let integrand = |u: f64| 2.0 * u.powi(dm1) * (2.0 - u * u).powf(half_exp);
    let r = integrate_adaptive(integrand, 0.0, h.sqrt(), 1e-16)
        .expect("cap integrand is smooth on [0, 1]");
    c * r.value
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        let weight_sum: f64 = w.iter().sum();
        assert_relative_eq!(weight_sum, 2.0, epsilon = 1e-14);
        // degree 14 monomial: ∫ x^14 = 2/15
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert_relative_eq!(v, 2.0 / 15.0, epsilon = 1e-14);
    }

    #[test]
    fn odd_gauss_rule_has_center_node() {
        let (x, _) = gauss_legendre(7);
        assert_eq!(x[3], 0.0);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn constant_integrates_to_one() {
        for d in 2..=7 {
            let r = zonal_integral(|_| 1.0, d).unwrap();
            assert!((r.value - 1.0).abs() < 1e-12, "d={d}: {}", r.value);
        }
    }

    #[test]
    fn odd_function_integrates_to_zero() {
        for d in 2..=5 {
            let r = zonal_integral(|t| t, d).unwrap();
            assert!(r.value.abs() < 1e-13);
            let r = zonal_integral(|t| t.powi(5) - 2.0 * t.powi(3), d).unwrap();
            assert!(r.value.abs() < 1e-13);
        }
    }

    #[test]
    fn second_moment_is_one_over_d_plus_one() {
        for d in 2..=6 {
            let r = zonal_integral(|t| t * t, d).unwrap();
            assert_relative_eq!(r.value, 1.0 / (d as f64 + 1.0), max_relative = 1e-12);
        }
    }

    #[test]
    fn adaptive_handles_endpoint_log_singularity() {
        // ∫_0^1 -ln(u) du = 1
        let r = integrate_adaptive(|u| -u.ln(), 0.0, 1.0, 1e-13).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11, "{}", r.value);
    }

    #[test]
    fn cap_measure_by_height_on_s2_is_linear() {
        for &h in &[0.001, 0.3, 1.0, 1.7] {
            assert_relative_eq!(cap_measure_by_height(2, h), h / 2.0, max_relative = 1e-14);
        }
    }
}
