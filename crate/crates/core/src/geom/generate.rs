use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::PointSet;
use crate::error::{invalid, Result};

/// `n` independent uniform points on S^d (normalized Gaussian vectors).
/// The same `(d, n, seed)` always yields the same set.
pub fn random_uniform(d: usize, n: usize, seed: u64) -> Result<PointSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_uniform_with(d, n, &mut rng)
}

pub(crate) fn random_uniform_with<R: Rng>(d: usize, n: usize, rng: &mut R) -> Result<PointSet> {
    if n == 0 {
        return Err(invalid("need at least one point"));
    }
    let dim = d + 1;
    let mut coords = Vec::with_capacity(n * dim);
    for _ in 0..n {
        // resample the (measure-zero) tiny vectors so normalization is safe
        loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            if super::norm(&v) > 1e-6 {
                coords.extend(v);
                break;
            }
        }
    }
    PointSet::normalized(d, coords).map(|s| s.with_label(format!("random-uniform d={d} n={n}")))
}

/// Spherical Fibonacci lattice with `n` points on S².
pub fn fibonacci_sphere(n: usize) -> Result<PointSet> {
    if n == 0 {
        return Err(invalid("need at least one point"));
    }
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let nf = n as f64;
    let mut coords = Vec::with_capacity(3 * n);
    for i in 0..n {
        let z = 1.0 - (2.0 * i as f64 + 1.0) / nf;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden_angle * i as f64;
        coords.extend([r * phi.cos(), r * phi.sin(), z]);
    }
    PointSet::normalized(2, coords).map(|s| s.with_label(format!("fibonacci n={n}")))
}

/// Haar-random orthogonal `(dim x dim)` matrix, row-major, from Gram-Schmidt
/// on a Gaussian matrix.
pub fn random_orthogonal(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while rows.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for r in &rows {
                let p = super::dot(&v, r);
                v.iter_mut().zip(r).for_each(|(a, b)| *a -= p * b);
            }
        }
        let n = super::norm(&v);
        if n > 1e-8 {
            rows.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    rows.concat()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{min_separation, CapSpec};

    #[test]
    fn random_is_seeded() {
        let a = random_uniform(2, 50, 11).unwrap();
        let b = random_uniform(2, 50, 11).unwrap();
        let c = random_uniform(2, 50, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(random_uniform(2, 1, 3).unwrap().len(), 1);
        assert!(random_uniform(2, 0, 3).is_err());
    }

    #[test]
    fn random_cap_counts_follow_area() {
        let n = 20_000;
        let set = random_uniform(3, n, 99).unwrap();
        let cap = CapSpec::new(vec![0.0, 0.0, 0.0, 1.0], 1.0).unwrap();
        let p = cap.area();
        let expected = p * n as f64;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        let got = cap.count(&set) as f64;
        assert!(
            (got - expected).abs() < 5.0 * sd,
            "{got} vs {expected} ± {sd}"
        );
    }

    #[test]
    fn fibonacci_is_deterministic_and_separated() {
        let a = fibonacci_sphere(100).unwrap();
        assert_eq!(a, fibonacci_sphere(100).unwrap());
        assert!(min_separation(&a).unwrap() > 0.1);
    }

    #[test]
    fn orthogonal_matrix_is_orthogonal() {
        let q = random_orthogonal(4, 1);
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = (0..4).map(|k| q[i * 4 + k] * q[j * 4 + k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-13);
            }
        }
    }
}
