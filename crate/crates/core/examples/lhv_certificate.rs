//! Enumerates every deterministic local strategy for the ring of four and
//! shows why none of them reaches the paradox outcomes.
//!
//! cargo run --release --example lhv_certificate

use std::f64::consts::PI;

use hardy_core::{contradiction_chains, correlation_implications, verify_paradox, EntanglerSpec};

fn main() -> hardy_core::Result<()> {
    let spec = EntanglerSpec::cycle(4)?;
    let theta = 0.423 * PI;

    let report = verify_paradox(&spec, theta)?;
    println!(
        "{} of {} strategies agree with every quantum support",
        report.consistent_count, report.strategies_total
    );
    println!("paradox states: {}", report.paradox_states.join(" "));
    println!("quantum weight on them: {:.4}%", 100.0 * report.p_success);

    for k in 1..=spec.n() {
        println!("{}", correlation_implications(&spec, theta, k)?);
    }

    let chains = contradiction_chains(&spec, theta, "1100")?;
    println!("{} chains for 1100:", chains.len());
    for chain in &chains {
        let steps: Vec<String> = chain
            .choices
            .iter()
            .map(|c| {
                let up: Vec<String> = c.partners_up.iter().map(|j| format!("U{j}")).collect();
                format!("D{}=1 -> {}=1", c.particle, up.join("="))
            })
            .collect();
        println!("  {}  => {}", steps.join(", "), chain.violated_vanished_state);
    }
    Ok(())
}
