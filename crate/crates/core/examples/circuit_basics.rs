//! Drives the statevector simulator directly: build a circuit, post-select
//! the ancillas and sample shots.
//!
//! cargo run --release --example circuit_basics

use std::f64::consts::PI;

use hardy_core::{postselect_ancillas, probabilities, run_circuit, sample_histogram, Circuit, Gate};

fn main() -> hardy_core::Result<()> {
    // two data qubits and one ancilla that flags |11>
    let mut circuit = Circuit::new(2, 1)?;
    circuit.push(Gate::ry(PI / 2.0, 0))?;
    circuit.push(Gate::ry(PI / 3.0, 1))?;
    circuit.push(Gate::mcx(vec![0, 1], 2))?;

    let state = run_circuit(&circuit)?;
    println!("before post-selection: {:?}", probabilities(&state));

    let (kept, weight) = postselect_ancillas(&state, &circuit.ancillas(), false)?;
    println!("kept weight {weight:.4}");
    let exact = probabilities(&kept);
    let hist = sample_histogram(&exact, 10_000, 42)?;
    for (outcome, p) in &exact {
        println!("{outcome}: exact {p:.4}  sampled {:.4}", hist.frequency(outcome));
    }
    Ok(())
}
