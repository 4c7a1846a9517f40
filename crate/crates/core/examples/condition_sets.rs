//! Runs the three measurement settings on the four-particle ring and prints
//! sampled frequencies next to the closed-form values.
//!
//! cargo run --release --example condition_sets

use std::f64::consts::PI;

use hardy_core::cli::run_setting;
use hardy_core::{EntanglerSpec, MeasurementSetting};

fn main() -> hardy_core::Result<()> {
    let spec = EntanglerSpec::cycle(4)?;
    let theta = 0.423 * PI;
    let settings = [
        MeasurementSetting::none(),
        MeasurementSetting::single(1),
        MeasurementSetting::all(4),
    ];
    for setting in &settings {
        let (report, _) = run_setting(&spec, theta, setting, 409_600, 7)?;
        println!("== {} (post-selection rate {:.4})", report.setting, report.post_selection_rate);
        for (outcome, count) in &report.counts {
            let exact = report.analytic[outcome];
            if *count == 0 && exact < 1e-12 {
                continue;
            }
            println!(
                "  {outcome}  sampled {:6.2}%  exact {:6.2}%",
                100.0 * *count as f64 / report.shots as f64,
                100.0 * exact
            );
        }
        if let Some(p) = report.p_success {
            println!("  p_success {:.3}%", 100.0 * p);
        }
    }
    Ok(())
}
