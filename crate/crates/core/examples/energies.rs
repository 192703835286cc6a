//! Logarithmic and Riesz energies, directly and through the kernel split.

use tdesign::energy::{energy, kernel_split_energy, EnergyKind, EnergyOptions, SumOptions};
use tdesign::geom::{fibonacci_sphere, separation_constant};
use tdesign::jacobi::kernel_coefficients;

pub fn run_example() -> tdesign::Result<()> {
    let points = fibonacci_sphere(200)?;
    println!(
        "Fibonacci N=200, separation constant {:.3}",
        separation_constant(&points)?
    );
    for kind in [
        EnergyKind::Log,
        EnergyKind::Riesz { s: 1.0 },
        EnergyKind::Riesz { s: 2.0 },
    ] {
        let direct = energy(&points, kind, EnergyOptions::default())?;
        let table = kernel_coefficients(kind, kind.default_lambda(2), 2, 2000)?;
        let split = kernel_split_energy(&points, &table, 10, SumOptions::default())?;
        println!(
            "{kind:?}: direct {:.8}, head {:.8} + tail {:.8} = {:.8}",
            direct.value,
            split.head,
            split.tail,
            split.total()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> tdesign::Result<()> {
    run_example()
}
