//! Measured energies of constructed designs against the asymptotic
//! predictions, with a power-law fit of the log-energy remainder.

use tdesign::asymptotics::{
    fit_residual_exponent, predict_riesz_energy, sweep, PointSource, SweepConfig, SweepRange,
};
use tdesign::designs::ConstructOptions;
use tdesign::energy::EnergyKind;

pub fn run_example() -> tdesign::Result<()> {
    let config = SweepConfig::new(
        2,
        vec![EnergyKind::Log, EnergyKind::Riesz { s: 2.0 }],
        PointSource::Constructed {
            seed: 7,
            options: ConstructOptions::default(),
        },
        SweepRange::Strengths((2..=9).collect()),
    );
    let records = sweep(&config)?;
    for r in &records {
        println!(
            "t={:>2} N={:>3} {:<5} measured {:>12.4} residual {:>10.4}",
            r.t.unwrap_or(0),
            r.n,
            r.kind,
            r.measured.unwrap_or(f64::NAN),
            r.residual.unwrap_or(f64::NAN)
        );
    }
    let log: Vec<_> = records.into_iter().filter(|r| r.kind == "log").collect();
    let fit = fit_residual_exponent(&log)?;
    println!(
        "log remainder ~ N^{:.3} (r² {:.3})",
        fit.exponent, fit.r_squared
    );

    let p = predict_riesz_energy(2, 2.0, 100, Some(9))?;
    println!(
        "s = d = 2, N = 100, t = 9: predicted {:.2}, alternate {:?}",
        p.predicted, p.alternate
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> tdesign::Result<()> {
    run_example()
}
