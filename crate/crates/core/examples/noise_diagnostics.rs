//! Noisy trajectory runs: the diagnostic suite, and how the ring's first
//! setting degrades as the multi-control error rate grows.
//!
//! cargo run --release --example noise_diagnostics

use std::f64::consts::PI;

use hardy_core::{
    diagnostic_suite, build_circuit, run_noisy, tvd, EntanglerSpec, MeasurementSetting, NoiseModel,
};

fn main() -> hardy_core::Result<()> {
    let report = diagnostic_suite(&NoiseModel::new(0.01, 0.02, 0.005)?, 100_000, 7)?;
    for family in &report.families {
        println!("{:32} tvd {:.4}", family.name, family.ideal_vs_noisy_tvd);
    }

    let spec = EntanglerSpec::cycle(4)?;
    let circuit = build_circuit(&spec, 0.423 * PI, &MeasurementSetting::none())?;
    let ideal = run_noisy(&circuit, &NoiseModel::ideal(), 100_000, 1)?;
    for p_mc in [0.005, 0.01, 0.02, 0.04] {
        let noisy = run_noisy(&circuit, &NoiseModel::new(0.0, p_mc, 0.0)?, 100_000, 2)?;
        println!("p_mc {p_mc:<6} tvd {:.4}", tvd(&ideal, &noisy)?);
    }
    Ok(())
}
