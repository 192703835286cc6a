//! Jacobi polynomials: recurrence values, derivatives and the connection
//! formula onto the Gegenbauer basis of S^d.

use tdesign::jacobi::{
    connection_expand, jacobi_batch, jacobi_derivative, jacobi_eval, JacobiParams,
};

pub fn run_example() -> tdesign::Result<()> {
    let p = JacobiParams::new(1.5, 0.5)?;
    println!(
        "P_n^(1.5,0.5)(0.3) for n = 0..6: {:?}",
        jacobi_batch(6, p, 0.3)?
    );
    println!("d/dx P_5 at 0.3 = {:.6}", jacobi_derivative(5, p, 0.3)?);

    // rewrite P_6^(λ-1/2, λ-1/2) in the basis natural to S^3
    let (lambda, d) = (4.0, 3);
    let coeffs = connection_expand(6, lambda, d)?;
    let basis = JacobiParams::symmetric(0.5 * d as f64 - 1.0)?;
    let x = -0.4;
    let values = jacobi_batch(6, basis, x)?;
    let rebuilt: f64 = coeffs.iter().map(|&(m, c)| c * values[m]).sum();
    let direct = jacobi_eval(6, JacobiParams::symmetric(lambda - 0.5)?, x)?;
    println!("connection coefficients {coeffs:?}");
    println!("rebuilt {rebuilt:.15} vs direct {direct:.15}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> tdesign::Result<()> {
    run_example()
}
