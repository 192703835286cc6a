//! Content-addressed on-disk cache for kernel tables and constructed designs.
//!
//! Keys are SHA-256 digests of the JSON encoding of every parameter that
//! determines the cached value, so a change of any parameter changes the key.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::designs::ConstructOutcome;
use crate::error::{Error, Result};
use crate::jacobi::{kernel_coefficients, KernelCoefficients, KernelKind};

/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "TDESIGN_CACHE_DIR";

/// Hex digest (first 16 bytes) of the JSON form of `value`.
pub fn content_key<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest[..16].iter().map(|b| format!("{b:02x}")).collect())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn kernel_cache_path(
    dir: &Path,
    kind: KernelKind,
    lambda: f64,
    d: usize,
    nmax: usize,
) -> Result<PathBuf> {
    let key = content_key(&("kernel", kind, lambda, d, nmax))?;
    Ok(dir.join(format!("kernel-{key}.json")))
}

/// Kernel coefficients, read from `dir` when a matching table is cached and
/// computed (then stored) otherwise. A cached table whose parameters do not
/// match the request is ignored and overwritten.
pub fn cached_kernel_coefficients(
    dir: Option<&Path>,
    kind: KernelKind,
    lambda: f64,
    d: usize,
    nmax: usize,
) -> Result<KernelCoefficients> {
    let Some(dir) = dir else {
        return kernel_coefficients(kind, lambda, d, nmax);
    };
    let path = kernel_cache_path(dir, kind, lambda, d, nmax)?;
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(table) = serde_json::from_str::<KernelCoefficients>(&text) {
            if table.kind() == kind
                && table.lambda() == lambda
                && table.d() == d
                && table.nmax() == nmax
            {
                return Ok(table);
            }
        }
    }
    let table = kernel_coefficients(kind, lambda, d, nmax)?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    fs::write(&path, serde_json::to_vec(&table)?).map_err(io_err(&path))?;
    Ok(table)
}

/// Writes a constructed design as `design-<key>.txt` with a certificate
/// header, plus the outcome as `design-<key>.json`.
pub(crate) fn store_design(dir: &Path, key: &str, outcome: &ConstructOutcome) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let cert = &outcome.certificate;
    let header = design_header(outcome);
    crate::geom::write_point_set(
        dir.join(format!("design-{key}.txt")),
        outcome.points(),
        &header,
    )?;
    let json_path = dir.join(format!("design-{key}.json"));
    fs::write(&json_path, serde_json::to_vec_pretty(cert)?).map_err(io_err(&json_path))
}

/// Header comment lines recorded with a constructed point set.
pub fn design_header(outcome: &ConstructOutcome) -> Vec<(&'static str, String)> {
    let cert = &outcome.certificate;
    vec![
        ("d", cert.d.to_string()),
        ("t", cert.t.to_string()),
        ("N", cert.n.to_string()),
        ("seed", outcome.seed.to_string()),
        ("residual", format!("{:e}", cert.total_residual)),
        ("min_separation", cert.min_separation.to_string()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_change_with_parameters() {
        let a = content_key(&("kernel", KernelKind::Log, 5.0, 2usize, 100usize)).unwrap();
        let b = content_key(&("kernel", KernelKind::Log, 5.0, 2usize, 101usize)).unwrap();
        assert_ne!(a, b);
        assert_eq!(a.len(), 32);
    }

    #[test]
    fn kernel_cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let kind = KernelKind::Riesz { s: 2.0 };
        let first = cached_kernel_coefficients(Some(dir.path()), kind, 4.0, 2, 300).unwrap();
        let path = kernel_cache_path(dir.path(), kind, 4.0, 2, 300).unwrap();
        assert!(path.exists());
        let again = cached_kernel_coefficients(Some(dir.path()), kind, 4.0, 2, 300).unwrap();
        let fresh = kernel_coefficients(kind, 4.0, 2, 300).unwrap();
        for (a, b) in again.coefficients().iter().zip(fresh.coefficients()) {
            assert!((a - b).abs() <= 1e-15 * b.abs());
        }
        assert_eq!(first, again);
    }

    #[test]
    fn stale_cache_is_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let kind = KernelKind::Log;
        let path = kernel_cache_path(dir.path(), kind, 6.0, 2, 50).unwrap();
        let wrong = kernel_coefficients(kind, 6.0, 2, 40).unwrap();
        fs::write(&path, serde_json::to_vec(&wrong).unwrap()).unwrap();
        let got = cached_kernel_coefficients(Some(dir.path()), kind, 6.0, 2, 50).unwrap();
        assert_eq!(got.nmax(), 50);
    }
}
