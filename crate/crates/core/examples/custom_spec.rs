//! Loads a configuration from JSON (or builds a star-shaped one) and runs
//! the full certificate on it.
//!
//! cargo run --release --example custom_spec [spec.json]

use std::f64::consts::PI;

use hardy_core::{vanished_states, verify_paradox, EntanglerSpec};

fn main() -> hardy_core::Result<()> {
    let spec = match std::env::args().nth(1) {
        Some(path) => EntanglerSpec::from_path(path)?,
        None => EntanglerSpec::from_json_str(r#"{"n": 4, "control_sets": [[1, 2], [1, 3], [1, 4]]}"#)?,
    };
    println!("{spec}");
    println!("vanished: {:?}", vanished_states(&spec));

    let report = verify_paradox(&spec, 0.423 * PI)?;
    println!("paradox states: {:?}", report.paradox_states);
    println!("matches pair-sharing rule: {}", report.rule_agreement);
    for (state, count) in &report.chain_counts {
        println!("  {state}: {count} chains");
    }
    Ok(())
}
