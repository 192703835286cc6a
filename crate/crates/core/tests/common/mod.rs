#![allow(dead_code)]

use tdesign::geom::PointSet;

pub fn tetrahedron() -> PointSet {
    let s = 1.0 / 3f64.sqrt();
    PointSet::from_rows(
        2,
        &[
            vec![s, s, s],
            vec![s, -s, -s],
            vec![-s, s, -s],
            vec![-s, -s, s],
        ],
    )
    .unwrap()
}

pub fn octahedron() -> PointSet {
    let mut rows = Vec::new();
    for k in 0..3 {
        for sign in [1.0, -1.0] {
            let mut r = vec![0.0; 3];
            r[k] = sign;
            rows.push(r);
        }
    }
    PointSet::from_rows(2, &rows).unwrap()
}

/// Twelve vertices (0, ±1, ±φ) and cyclic shifts, normalized.
pub fn icosahedron() -> PointSet {
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let mut coords = Vec::new();
    for a in [1.0, -1.0] {
        for b in [phi, -phi] {
            for shift in 0..3 {
                let v = [0.0, a, b];
                for k in 0..3 {
                    coords.push(v[(k + 3 - shift) % 3]);
                }
            }
        }
    }
    PointSet::normalized(2, coords).unwrap()
}

pub fn sorted_distances(p: &PointSet) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            out.push(p.dist_sq(i, j).sqrt());
        }
    }
    out.sort_by(f64::total_cmp);
    out
}
