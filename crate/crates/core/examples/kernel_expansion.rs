//! Jacobi series of the Riesz and logarithmic kernels, split into a
//! degree-t head and the remaining tail.

use tdesign::jacobi::{head_integral, log_coefficients, riesz_coefficients};

pub fn run_example() -> tdesign::Result<()> {
    let riesz = riesz_coefficients(2.0, 4.0, 2, 2000)?;
    let log = log_coefficients(5.0, 2, 2000)?;
    let t = 8;
    for x in [-0.5, 0.0, 0.5] {
        for k in [&riesz, &log] {
            let head = k.head(t, x)?;
            let tail = k.tail_with_estimate(t, x)?;
            println!(
                "{:?} x={x:+.1}: head {head:.10} + tail {:.10} = {:.12} (exact {:.12}, remainder ~{:.1e})",
                k.kind(),
                tail.value,
                head + tail.value,
                k.kind().exact(x),
                tail.remainder_estimate
            );
        }
    }
    println!("log series constant term {:.12}", log.constant_term());
    println!(
        "integral of the s=2, t=8 head over S^2: {:.12}",
        head_integral(2.0, 4.0, 2, t)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> tdesign::Result<()> {
    run_example()
}
