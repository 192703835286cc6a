//! Deterministic reductions give the same bits for any thread count.

use tdesign::energy::{energy, with_threads, EnergyKind, EnergyOptions};
use tdesign::geom::random_uniform;

pub fn run_example() -> tdesign::Result<()> {
    let points = random_uniform(2, 2000, 42)?;
    for threads in [1, 2, 8] {
        let det = with_threads(Some(threads), || {
            energy(&points, EnergyKind::Log, EnergyOptions::deterministic())
        })?;
        let free = with_threads(Some(threads), || {
            energy(&points, EnergyKind::Log, EnergyOptions::default())
        })?;
        println!(
            "{threads} threads: deterministic {:016x} ({:.12}), free {:.12}",
            det.value.to_bits(),
            det.value,
            free.value
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> tdesign::Result<()> {
    run_example()
}
