//! Certifying and constructing spherical t-designs.

use tdesign::designs::{construct_design, verify_design, ConstructOptions, VerifyOptions};
use tdesign::geom::PointSet;

pub fn run_example() -> tdesign::Result<()> {
    let s = 1.0 / 3f64.sqrt();
    let tetra = PointSet::from_rows(
        2,
        &[
            vec![s, s, s],
            vec![s, -s, -s],
            vec![-s, s, -s],
            vec![-s, -s, s],
        ],
    )?;
    for t in [2, 3] {
        let cert = verify_design(&tetra, t, 1e-10, VerifyOptions::default())?;
        println!(
            "tetrahedron as a {t}-design: {:?}, total residual {:.2e}",
            cert.verdict, cert.total_residual
        );
    }

    let out = construct_design(2, 6, None, 1, ConstructOptions::default())?;
    let cert = &out.certificate;
    println!(
        "constructed t=6 design: N={}, residual {:.2e}, separation constant {:.3}, verdict {:?}",
        cert.n, cert.total_residual, cert.separation_constant, cert.verdict
    );
    println!("per-degree residuals: {:?}", cert.per_degree_residuals);
    Ok(())
}

#[allow(dead_code)]
fn main() -> tdesign::Result<()> {
    run_example()
}
