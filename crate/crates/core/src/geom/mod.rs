//! Point sets on S^d, cap geometry and separation quantities.
//!
//! Points are kept in Cartesian coordinates in R^{d+1}; angles are derived on
//! demand.

pub(crate) mod generate;
mod io;

pub use generate::{fibonacci_sphere, random_orthogonal, random_uniform};
pub use io::{load_point_set, parse_point_set, write_point_set};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::cap_measure_by_height;

/// Unit-norm tolerance a [`PointSet`] guarantees.
pub const UNIT_TOLERANCE: f64 = 1e-10;

/// `N >= 1` unit vectors in R^{d+1}. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    d: usize,
    coords: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl PointSet {
    /// Builds a point set from flat coordinates (`N * (d + 1)` values), checking
    /// that every row has norm 1 within [`UNIT_TOLERANCE`].
    pub fn new(d: usize, coords: Vec<f64>) -> Result<Self> {
        let set = Self::from_raw(d, coords)?;
        for (i, p) in set.iter().enumerate() {
            let norm = norm(p);
            if (norm - 1.0).abs() > UNIT_TOLERANCE {
                return Err(Error::NotUnitNorm {
                    row: i + 1,
                    norm,
                    tolerance: UNIT_TOLERANCE,
                });
            }
        }
        Ok(set)
    }

    /// Builds a point set after projecting every row onto the sphere.
    /// Zero rows are rejected.
    pub fn normalized(d: usize, mut coords: Vec<f64>) -> Result<Self> {
        let dim = d + 1;
        if d < 2 || !coords.len().is_multiple_of(dim) {
            return Err(invalid(
                "need d >= 2 and a coordinate count that is a multiple of d + 1",
            ));
        }
        for (i, row) in coords.chunks_exact_mut(dim).enumerate() {
            let n = norm(row);
            if !(n > 0.0) || !n.is_finite() {
                return Err(invalid(format!(
                    "row {} cannot be normalized (norm {n})",
                    i + 1
                )));
            }
            row.iter_mut().for_each(|v| *v /= n);
        }
        Self::from_raw(d, coords)
    }

    /// Builds a point set from rows of length `d + 1`.
    pub fn from_rows(d: usize, rows: &[Vec<f64>]) -> Result<Self> {
        if let Some(bad) = rows.iter().position(|r| r.len() != d + 1) {
            return Err(invalid(format!(
                "row {} has {} coordinates, expected {}",
                bad + 1,
                rows[bad].len(),
                d + 1
            )));
        }
        Self::new(d, rows.concat())
    }

    fn from_raw(d: usize, coords: Vec<f64>) -> Result<Self> {
        if d < 2 {
            return Err(invalid(format!("sphere dimension d = {d} must be >= 2")));
        }
        let dim = d + 1;
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(invalid(format!(
                "need a positive multiple of d + 1 = {dim} coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(invalid("coordinates must be finite"));
        }
        Ok(Self {
            d,
            coords,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Sphere dimension `d` (points live in R^{d+1}).
    pub fn d(&self) -> usize {
        self.d
    }

    /// Ambient dimension `d + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.d + 1
    }

    pub fn len(&self) -> usize {
        self.coords.len() / (self.d + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let dim = self.d + 1;
        &self.coords[i * dim..(i + 1) * dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.d + 1)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Applies a linear map given as a row-major `(d+1) x (d+1)` matrix.
    /// The result is renormalized, so any orthogonal matrix is accepted.
    pub fn transformed(&self, matrix: &[f64]) -> Result<Self> {
        let dim = self.d + 1;
        if matrix.len() != dim * dim {
            return Err(invalid("matrix size does not match ambient dimension"));
        }
        let mut out = Vec::with_capacity(self.coords.len());
        for p in self.iter() {
            for r in 0..dim {
                out.push((0..dim).map(|c| matrix[r * dim + c] * p[c]).sum());
            }
        }
        let mut set = Self::normalized(self.d, out)?;
        set.label = self.label.clone();
        Ok(set)
    }

    /// Inner product of points `i` and `j`.
    pub fn inner(&self, i: usize, j: usize) -> f64 {
        dot(self.point(i), self.point(j))
    }

    /// Squared Euclidean distance between points `i` and `j`.
    pub fn dist_sq(&self, i: usize, j: usize) -> f64 {
        dist_sq(self.point(i), self.point(j))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `min_{i != j} |x_i - x_j|`. Zero when the set contains a duplicate.
pub fn min_separation(points: &PointSet) -> Result<f64> {
    let n = points.len();
    if n < 2 {
        return Err(invalid("minimum separation needs at least two points"));
    }
    // a minimum does not depend on evaluation order, so rayon is free here
    let min_sq = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = points.point(i);
            (i + 1..n)
                .map(|j| dist_sq(xi, points.point(j)))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(min_sq.sqrt())
}

/// Measured separation constant `min_separation · N^{1/d}`.
pub fn separation_constant(points: &PointSet) -> Result<f64> {
    Ok(min_separation(points)? * (points.len() as f64).powf(1.0 / points.d() as f64))
}

/// A spherical cap `{ y : <x, y> >= cos φ }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapSpec {
    center: Vec<f64>,
    angular_radius: f64,
}

impl CapSpec {
    pub fn new(center: Vec<f64>, angular_radius: f64) -> Result<Self> {
        if center.len() < 3 {
            return Err(invalid("cap center must live in R^{d+1} with d >= 2"));
        }
        let n = norm(&center);
        if (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(invalid(format!("cap center norm {n} is not 1")));
        }
        check_radius(angular_radius)?;
        Ok(Self {
            center,
            angular_radius,
        })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn angular_radius(&self) -> f64 {
        self.angular_radius
    }

    pub fn d(&self) -> usize {
        self.center.len() - 1
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        dot(&self.center, y) >= self.angular_radius.cos()
    }

    /// Normalized area of the cap.
    pub fn area(&self) -> f64 {
        cap_area(self.d(), self.angular_radius).expect("validated at construction")
    }

    /// Number of points of `set` inside the cap.
    pub fn count(&self, set: &PointSet) -> usize {
        set.iter().filter(|p| self.contains(p)).count()
    }
}

fn check_radius(phi: f64) -> Result<()> {
    if !(phi > 0.0 && phi <= std::f64::consts::PI) {
        return Err(invalid(format!(
            "cap angular radius must lie in (0, π], got {phi}"
        )));
    }
    Ok(())
}

/// Normalized surface area of a cap of angular radius `φ` on S^d:
/// `Γ((d+1)/2)/(√π Γ(d/2)) ∫_{cos φ}^1 (1 - t²)^{d/2-1} dt`.
pub fn cap_area(d: usize, phi: f64) -> Result<f64> {
    if d < 2 {
        return Err(invalid(format!("sphere dimension d = {d} must be >= 2")));
    }
    check_radius(phi)?;
    // 1 - cos φ without cancellation for small caps
    let height = 2.0 * (0.5 * phi).sin().powi(2);
    Ok(cap_measure_by_height(d, height))
}

/// `α_N = arccos(1 - c1² / (8 N^{2/d}))`: a cap of this radius holds at most
/// one point of a set with separation `c1 N^{-1/d}`.
pub fn alpha_n(c1: f64, n: usize, d: usize) -> Result<f64> {
    if !(c1 > 0.0) || n == 0 || d == 0 {
        return Err(invalid("alpha_N needs c1 > 0, N >= 1, d >= 1"));
    }
    let h = c1 * c1 / (8.0 * (n as f64).powf(2.0 / d as f64));
    if h > 2.0 {
        return Err(invalid(format!(
            "arccos argument 1 - {h} falls outside [-1, 1]"
        )));
    }
    // arccos(1 - h) = 2 asin(sqrt(h/2)), accurate for small h
    Ok(2.0 * (0.5 * h).sqrt().asin())
}

/// The interval `[sin α_N, (π/2) sin α_N]` containing `α_N`, with
/// `sin α_N = (1 - c1²/(16 N^{2/d}))^{1/2} c1 / (2 N^{1/d})`.
/// Valid while `α_N <= π/2`, where `sin α >= 2α/π` holds.
pub fn alpha_n_bracket(c1: f64, n: usize, d: usize) -> Result<(f64, f64)> {
    let alpha = alpha_n(c1, n, d)?;
    if alpha > std::f64::consts::FRAC_PI_2 * (1.0 + 1e-14) {
        return Err(invalid(format!(
            "bracket needs alpha_N <= π/2, got {alpha}"
        )));
    }
    let root = (n as f64).powf(1.0 / d as f64);
    let sin_alpha = (1.0 - c1 * c1 / (16.0 * root * root)).sqrt() * c1 / (2.0 * root);
    Ok((sin_alpha, std::f64::consts::FRAC_PI_2 * sin_alpha))
}

/// Cap radius `β_N` with normalized area exactly `1/N`, together with the
/// height coefficient `b0` such that `1 - cos β_N = b0 N^{-2/d}`.
pub fn beta_n(d: usize, n: usize) -> Result<(f64, f64)> {
    if d < 2 || n < 2 {
        return Err(invalid("beta_N needs d >= 2 and N >= 2"));
    }
    let target = 1.0 / n as f64;
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    if !(cap_measure_by_height(d, lo) < target && cap_measure_by_height(d, hi) > target) {
        return Err(crate::error::Error::RootFinding(format!(
            "cap measure does not bracket 1/N for d = {d}, N = {n}"
        )));
    }
    while hi - lo > 1e-14 * hi.max(1e-300) && hi - lo > 1e-300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cap_measure_by_height(d, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h = 0.5 * (lo + hi);
    let b0 = h * (n as f64).powf(2.0 / d as f64);
    Ok((2.0 * (0.5 * h).sqrt().asin(), b0))
}
