//! Sweeps the rotation angle and reports where the paradox is strongest.
//!
//! cargo run --release --example theta_sweep

use std::f64::consts::PI;

use hardy_core::analytic::FINE_GRID_POINTS;
use hardy_core::{interest_states_rule, sweep_theta, sweep_theta_fine, EntanglerSpec};

fn main() -> hardy_core::Result<()> {
    let spec = EntanglerSpec::cycle(4)?;
    let interest = interest_states_rule(&spec);

    let coarse = sweep_theta(&spec, &interest, 0.0, PI, PI / 18.0)?;
    for p in &coarse.grid {
        let bar = "#".repeat((p.p_success * 400.0).round() as usize);
        println!("{:5.3}pi {:7.4}% {bar}", p.theta / PI, 100.0 * p.p_success);
    }

    let fine = sweep_theta_fine(&spec, &interest, 0.0, PI, FINE_GRID_POINTS)?;
    let (theta, p) = fine.best();
    println!("fine grid peak: theta = {:.4}pi, p_success = {:.4}%", theta / PI, 100.0 * p);

    coarse.write_csv(std::io::stdout().lock())?;
    Ok(())
}
