//! Ring versus complete control sets: vanished outcomes, paradox states and
//! the best achievable success probability.
//!
//! cargo run --release --example compare_configs [n]

use std::f64::consts::PI;

use hardy_core::cli::compare_column;
use hardy_core::EntanglerSpec;

fn main() -> hardy_core::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4);
    let theta = 0.423 * PI;
    for spec in [EntanglerSpec::cycle(n)?, EntanglerSpec::complete(n)?] {
        let col = compare_column(&spec, theta)?;
        println!(
            "{spec}: {} vanished, {} paradox states, max p_success {:.3}% at {:.4}pi",
            col.vanished,
            col.paradox_states,
            100.0 * col.max_p_success,
            col.argmax_theta / PI
        );
    }
    Ok(())
}
