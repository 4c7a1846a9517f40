use std::collections::BTreeSet;
use std::f64::consts::PI;

use hardy_core::{
    amplitudes_for_setting, build_circuit, enumerate_consistent_strategies, interest_states_rule,
    paradox_states_oracle, postselect_ancillas, probabilities, quantum_supports, run_circuit,
    run_noisy, sample_histogram, tvd, vanished_states, verify_paradox, BasisCoeffs, Circuit,
    EntanglerSpec, Error, Gate, MeasurementSetting, NoiseModel,
};

fn specs() -> Vec<EntanglerSpec> {
    vec![
        EntanglerSpec::cycle(3).unwrap(),
        EntanglerSpec::cycle(4).unwrap(),
        EntanglerSpec::cycle(5).unwrap(),
        EntanglerSpec::complete(2).unwrap(),
        EntanglerSpec::complete(3).unwrap(),
        EntanglerSpec::complete(4).unwrap(),
        EntanglerSpec::custom(4, vec![vec![1, 2], vec![1, 3], vec![1, 4]]).unwrap(),
        EntanglerSpec::custom(5, vec![vec![1, 2, 3], vec![3, 4], vec![4, 5]]).unwrap(),
    ]
}

#[test]
fn circuit_agrees_with_closed_form() {
    for spec in specs() {
        let n = spec.n();
        for theta in [0.13, 0.29, 0.423, 0.5, 0.71, 0.88] {
            let theta = theta * PI;
            let coeffs = BasisCoeffs::uniform(theta, n).unwrap();
            let mut settings = MeasurementSetting::standard_family(n);
            settings.push(MeasurementSetting::new([1, n], n).unwrap());
            for setting in settings {
                let circuit = build_circuit(&spec, theta, &setting).unwrap();
                let (kept, _) = postselect_ancillas(&run_circuit(&circuit).unwrap(), &circuit.ancillas(), false).unwrap();
                let exact = probabilities(&kept);
                let analytic = amplitudes_for_setting(&spec, &coeffs, &setting).unwrap();
                for (k, p) in &exact {
                    assert!((p - analytic.probability(k)).abs() < 1e-9, "{spec} {setting:?} {k}");
                }
            }
        }
    }
}

#[test]
fn vanished_states_have_zero_weight_in_first_setting() {
    for spec in specs() {
        let circuit = build_circuit(&spec, 0.4 * PI, &MeasurementSetting::none()).unwrap();
        let (kept, _) = postselect_ancillas(&run_circuit(&circuit).unwrap(), &circuit.ancillas(), false).unwrap();
        let probs = probabilities(&kept);
        for v in vanished_states(&spec) {
            assert!(probs[&v] < 1e-12, "{spec}: {v}");
        }
    }
}

#[test]
fn oracle_agrees_with_rule_across_angles() {
    let specs = [
        EntanglerSpec::cycle(4).unwrap(),
        EntanglerSpec::complete(2).unwrap(),
        EntanglerSpec::complete(3).unwrap(),
        EntanglerSpec::complete(4).unwrap(),
    ];
    for spec in &specs {
        for i in 1..=16 {
            let theta = (0.1 + 0.8 * i as f64 / 17.0) * PI;
            assert_eq!(paradox_states_oracle(spec, theta).unwrap(), interest_states_rule(spec), "{spec} at {theta}");
        }
    }
}

#[test]
fn enumeration_is_sound_and_complete() {
    for spec in [EntanglerSpec::cycle(4).unwrap(), EntanglerSpec::complete(3).unwrap()] {
        let n = spec.n();
        let theta = 0.423 * PI;
        let supports = quantum_supports(&spec, theta).unwrap();
        let consistent = enumerate_consistent_strategies(n, &supports).unwrap();
        for s in &consistent {
            for sup in &supports {
                assert!(sup.contains(&s.outcome(&sup.setting)));
            }
        }
        let all = MeasurementSetting::all(n);
        let reached: BTreeSet<String> = consistent.iter().map(|s| s.outcome(&all)).collect();
        let paradox = paradox_states_oracle(&spec, theta).unwrap();
        let all_support = supports.iter().find(|s| s.setting == all).unwrap();
        for outcome in &all_support.support {
            assert_ne!(reached.contains(outcome), paradox.contains(outcome), "{spec}: {outcome}");
        }
    }
}

#[test]
fn ring_of_three_differs_from_complete_three() {
    let theta = 0.423 * PI;
    let ring = paradox_states_oracle(&EntanglerSpec::cycle(3).unwrap(), theta).unwrap();
    let complete = paradox_states_oracle(&EntanglerSpec::complete(3).unwrap(), theta).unwrap();
    assert_ne!(ring, complete);
}

#[test]
fn enumeration_cap_is_enforced() {
    let spec = EntanglerSpec::cycle(9).unwrap();
    assert!(matches!(verify_paradox(&spec, 0.4 * PI), Err(Error::EnumerationCap { n: 9, .. })));
}

#[test]
fn degenerate_angle_is_rejected() {
    let spec = EntanglerSpec::cycle(4).unwrap();
    let circuit = build_circuit(&spec, PI, &MeasurementSetting::none()).unwrap();
    let state = run_circuit(&circuit).unwrap();
    assert!(matches!(
        postselect_ancillas(&state, &circuit.ancillas(), false),
        Err(Error::PostSelectionImpossible { .. })
    ));
}

#[test]
fn sampling_converges_within_four_sigma() {
    let spec = EntanglerSpec::cycle(4).unwrap();
    let circuit = build_circuit(&spec, 0.423 * PI, &MeasurementSetting::all(4)).unwrap();
    let (kept, _) = postselect_ancillas(&run_circuit(&circuit).unwrap(), &circuit.ancillas(), false).unwrap();
    let probs = probabilities(&kept);
    let shots = 409_600u64;
    for seed in [1, 2, 3] {
        let h = sample_histogram(&probs, shots, seed).unwrap();
        assert_eq!(h.shots, shots);
        for (k, p) in &probs {
            let sigma = (p * (1.0 - p) / shots as f64).sqrt();
            assert!((h.frequency(k) - p).abs() <= 4.0 * sigma + 1e-12, "seed {seed} {k}");
        }
    }
    assert_ne!(sample_histogram(&probs, shots, 1).unwrap(), sample_histogram(&probs, shots, 2).unwrap());
}

#[test]
fn zero_noise_matches_ideal_distribution() {
    let spec = EntanglerSpec::cycle(4).unwrap();
    let circuit = build_circuit(&spec, 0.423 * PI, &MeasurementSetting::none()).unwrap();
    let (kept, _) = postselect_ancillas(&run_circuit(&circuit).unwrap(), &circuit.ancillas(), false).unwrap();
    let probs = probabilities(&kept);
    let shots = 100_000u64;
    let h = run_noisy(&circuit, &NoiseModel::ideal(), shots, 5).unwrap();
    let kept_shots = h.shots as f64;
    for (k, p) in &probs {
        let sigma = (p * (1.0 - p) / kept_shots).sqrt();
        assert!((h.frequency(k) - p).abs() <= 4.0 * sigma + 1e-12, "{k}");
    }
}

#[test]
fn full_readout_flip_is_certain() {
    let mut c = Circuit::new(1, 0).unwrap();
    c.push(Gate::ry(0.0, 0)).unwrap();
    let h = run_noisy(&c, &NoiseModel::new(0.0, 0.0, 1.0).unwrap(), 1000, 3).unwrap();
    assert_eq!(h.count("1"), 1000);
}

#[test]
fn noisy_runs_are_deterministic() {
    let spec = EntanglerSpec::cycle(4).unwrap();
    let circuit = build_circuit(&spec, 0.423 * PI, &MeasurementSetting::all(4)).unwrap();
    let noise = NoiseModel::new(0.01, 0.02, 0.005).unwrap();
    assert_eq!(run_noisy(&circuit, &noise, 40_000, 11).unwrap(), run_noisy(&circuit, &noise, 40_000, 11).unwrap());
}

#[test]
fn distance_grows_with_multi_control_error() {
    let spec = EntanglerSpec::cycle(4).unwrap();
    let circuit = build_circuit(&spec, 0.423 * PI, &MeasurementSetting::none()).unwrap();
    let ideal = run_noisy(&circuit, &NoiseModel::ideal(), 100_000, 1).unwrap();
    let distances: Vec<f64> = [0.005, 0.01, 0.02, 0.04]
        .iter()
        .map(|&p| tvd(&ideal, &run_noisy(&circuit, &NoiseModel::new(0.0, p, 0.0).unwrap(), 100_000, 2).unwrap()).unwrap())
        .collect();
    assert!(distances[0] > 0.0);
    for w in distances.windows(2) {
        assert!(w[1] > w[0], "{distances:?}");
    }
}
