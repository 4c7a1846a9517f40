//! Statevector simulation and local-hidden-variable certification of
//! Hardy-type nonlocality for particles entangled along a configurable
//! graph of Toffoli control sets.
//!
//! The main pieces:
//!
//! - [`sv`]: dense statevector simulator with ancilla post-selection and
//!   seeded multinomial shot sampling.
//! - [`config`]: entanglement configurations (ring, complete, custom),
//!   vanished outcomes and circuit construction for each measurement setting.
//! - [`analytic`]: closed-form amplitudes, normalization, `P_success` and
//!   angle sweeps.
//! - [`lhv`]: exhaustive deterministic local-hidden-variable enumeration,
//!   paradox states and contradiction chains.
//! - [`noise`]: Monte-Carlo Pauli-trajectory noise and a diagnostic circuit
//!   suite.
//! - [`cli`]: the `hardy` command-line front end.

pub mod analytic;
pub mod bits;
pub mod cli;
pub mod config;
pub mod error;
pub mod lhv;
pub mod noise;
pub mod sv;

pub use analytic::{
    amplitudes_for_setting, coeffs_from_theta, normalization_constant, p_success_analytic,
    sweep_theta, sweep_theta_fine, AmplitudeMap, BasisCoeffs, NormalizationResult, SweepResult,
};
pub use config::{
    build_circuit, interest_states_rule, make_spec, vanished_states, EntanglerSpec,
    MeasurementSetting, SpecKind,
};
pub use error::{Error, Result};
pub use lhv::{
    contradiction_chains, correlation_implications, enumerate_consistent_strategies,
    paradox_states_oracle, quantum_supports, verify_paradox, ContradictionChain, LhvStrategy,
    ParadoxReport, SupportSet,
};
pub use noise::{diagnostic_suite, run_noisy, tvd, NoiseModel};
pub use sv::{
    apply_gate, postselect_ancillas, probabilities, run_circuit, sample_histogram, Circuit, Gate,
    Histogram, Statevector,
};
