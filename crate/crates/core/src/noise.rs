//! Monte-Carlo Pauli-trajectory noise and the diagnostic circuit suite.
//!
//! Each shot walks the circuit once. After every single-qubit gate the
//! target suffers a uniformly random Pauli with probability `p1`. After a
//! multi-controlled X with `c` controls, every participating qubit suffers
//! a random Pauli with the probability of `c^2` back-to-back depolarizing
//! events of strength `p_mc`, so a plain CNOT sees exactly `p_mc` and wider
//! gates degrade the way their two-qubit decompositions grow. Measured bits
//! flip independently with `p_ro`, and shots whose ancillas do not all read
//! 0 are discarded.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::to_bitstring;
use crate::error::{Error, Result};
use crate::sv::{probabilities, run_circuit, sample_histogram, Circuit, Gate, Histogram, Pauli, Statevector};

const BATCH_SHOTS: u64 = 16_384;
const MAX_CACHED_TRAJECTORIES: usize = 4_096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p1: f64,
    pub p_mc: f64,
    pub p_ro: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            p1: 0.01,
            p_mc: 0.02,
            p_ro: 0.005,
        }
    }
}

impl NoiseModel {
    pub fn new(p1: f64, p_mc: f64, p_ro: f64) -> Result<Self> {
        for (name, value) in [("p1", p1), ("p_mc", p_mc), ("p_ro", p_ro)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidProbability { name, value });
            }
        }
        Ok(Self { p1, p_mc, p_ro })
    }

    pub fn ideal() -> Self {
        Self {
            p1: 0.0,
            p_mc: 0.0,
            p_ro: 0.0,
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.p1 == 0.0 && self.p_mc == 0.0 && self.p_ro == 0.0
    }

    /// Per-qubit Pauli probability after a gate with `controls` controls:
    /// `c^2` compositions of the depolarizing channel, whose contraction
    /// factor is `1 - 4p/3`.
    pub fn mcx_qubit_error(&self, controls: usize) -> f64 {
        let rounds = (controls * controls).max(1) as i32;
        0.75 * (1.0 - (1.0 - 4.0 * self.p_mc / 3.0).powi(rounds))
    }

    fn gate_error(&self, gate: &Gate) -> f64 {
        match gate {
            Gate::Mcx { controls, .. } => self.mcx_qubit_error(controls.len()),
            _ => self.p1,
        }
    }
}

type Trajectory = Vec<(usize, usize, Pauli)>;

fn cumulative(state: &Statevector) -> Vec<f64> {
    let mut acc = 0.0;
    state
        .probability_vec()
        .into_iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

fn simulate(circuit: &Circuit, errors: &Trajectory) -> Result<Vec<f64>> {
    let mut state = Statevector::zero(circuit.num_qubits())?;
    let mut next = errors.iter().peekable();
    for (gi, gate) in circuit.gates.iter().enumerate() {
        state.apply(gate)?;
        while let Some(&&(g, q, p)) = next.peek() {
            if g != gi {
                break;
            }
            state.apply_pauli(q, p)?;
            next.next();
        }
    }
    Ok(cumulative(&state))
}

fn draw_index(cdf: &[f64], r: f64) -> usize {
    let target = r * cdf.last().copied().unwrap_or(1.0);
    cdf.partition_point(|&c| c <= target).min(cdf.len() - 1)
}

fn run_batch(circuit: &Circuit, noise: &NoiseModel, ideal: &[f64], shots: u64, seed: u64, batch: u64) -> Result<(Histogram, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let nq = circuit.num_qubits();
    let nd = circuit.num_data;
    let anc_mask = (1usize << circuit.num_ancilla) - 1;
    let error_probs: Vec<f64> = circuit.gates.iter().map(|g| noise.gate_error(g)).collect();
    let mut cache: HashMap<Trajectory, Vec<f64>> = HashMap::new();
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut attempts = 0u64;

    for _ in 0..shots {
        attempts += 1;
        let mut errors: Trajectory = Vec::new();
        for (gi, gate) in circuit.gates.iter().enumerate() {
            let p = error_probs[gi];
            if p == 0.0 {
                continue;
            }
            for q in gate.qubits() {
                if rng.random::<f64>() < p {
                    let pauli = match rng.random_range(0..3) {
                        0 => Pauli::X,
                        1 => Pauli::Y,
                        _ => Pauli::Z,
                    };
                    errors.push((gi, q, pauli));
                }
            }
        }
        let r: f64 = rng.random();
        let mut outcome = if errors.is_empty() {
            draw_index(ideal, r)
        } else if let Some(cdf) = cache.get(&errors) {
            draw_index(cdf, r)
        } else {
            let cdf = simulate(circuit, &errors)?;
            let idx = draw_index(&cdf, r);
            if cache.len() < MAX_CACHED_TRAJECTORIES {
                cache.insert(errors, cdf);
            }
            idx
        };
        if noise.p_ro > 0.0 {
            for q in 0..nq {
                if rng.random::<f64>() < noise.p_ro {
                    outcome ^= 1 << q;
                }
            }
        }
        if outcome & anc_mask == 0 {
            *counts.entry(outcome >> circuit.num_ancilla).or_insert(0) += 1;
        }
    }
    let mut hist = Histogram::empty(nd);
    for (idx, c) in counts {
        hist.record(to_bitstring(idx, nd), c);
    }
    Ok((hist, attempts))
}

/// Samples `shots` noisy trajectories and returns the post-selected data
/// histogram. `post_selection_rate` is the fraction of shots kept.
pub fn run_noisy(circuit: &Circuit, noise: &NoiseModel, shots: u64, seed: u64) -> Result<Histogram> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be at least 1".into()));
    }
    NoiseModel::new(noise.p1, noise.p_mc, noise.p_ro)?;
    let ideal = cumulative(&run_circuit(circuit)?);
    let batches: Vec<(u64, u64)> = (0..shots.div_ceil(BATCH_SHOTS))
        .map(|b| (b, BATCH_SHOTS.min(shots - b * BATCH_SHOTS)))
        .collect();
    let parts = batches
        .into_par_iter()
        .map(|(b, n)| run_batch(circuit, noise, &ideal, n, seed, b))
        .collect::<Result<Vec<_>>>()?;
    let mut hist = Histogram::empty(circuit.num_data);
    let mut attempts = 0;
    for (h, a) in &parts {
        hist.merge(h);
        attempts += a;
    }
    hist.post_selection_rate = hist.shots as f64 / attempts as f64;
    Ok(hist)
}

/// Total variation distance between the normalized frequencies.
pub fn tvd(h1: &Histogram, h2: &Histogram) -> Result<f64> {
    if h1.num_bits != h2.num_bits {
        return Err(Error::MismatchedOutcomeSpace(h1.num_bits, h2.num_bits));
    }
    if h1.shots == 0 || h2.shots == 0 {
        return Err(Error::InvalidInput("empty histogram".into()));
    }
    let keys: std::collections::BTreeSet<&String> = h1.counts.keys().chain(h2.counts.keys()).collect();
    Ok(0.5 * keys.into_iter().map(|k| (h1.frequency(k) - h2.frequency(k)).abs()).sum::<f64>())
}

/// One diagnostic circuit and how far its noisy histogram drifts from the
/// ideal one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyResult {
    pub name: String,
    pub ideal_vs_noisy_tvd: f64,
    pub params: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub noise: NoiseModel,
    pub shots: u64,
    pub seed: u64,
    pub families: Vec<FamilyResult>,
}

impl DiagnosticReport {
    pub fn tvd_of(&self, name: &str) -> Option<f64> {
        self.families.iter().find(|f| f.name == name).map(|f| f.ideal_vs_noisy_tvd)
    }
}

/// Each of `qubits` data qubits gets `first` then `second`, then controls
/// its own ancilla through a single-control X. Everything is measured.
pub fn independent_control_circuit(qubits: usize, first: &Gate, second: &Gate) -> Result<Circuit> {
    let mut c = Circuit::new(2 * qubits, 0)?;
    for q in 0..qubits {
        c.push(retarget(first, q))?;
        c.push(retarget(second, q))?;
    }
    for q in 0..qubits {
        c.push(Gate::mcx(vec![q], qubits + q))?;
    }
    Ok(c)
}

fn retarget(gate: &Gate, q: usize) -> Gate {
    match gate {
        Gate::Ry { theta, .. } => Gate::ry(*theta, q),
        Gate::X { .. } => Gate::X { target: q },
        Gate::H { .. } => Gate::H { target: q },
        Gate::Mcx { .. } => panic!("retarget expects a single-qubit gate"),
    }
}

/// RY(theta) on three qubits, then one 3-control X onto a single ancilla.
pub fn three_control_circuit(theta: f64) -> Result<Circuit> {
    let mut c = Circuit::new(4, 0)?;
    for q in 0..3 {
        c.push(Gate::ry(theta, q))?;
    }
    c.push(Gate::mcx(vec![0, 1, 2], 3))?;
    Ok(c)
}

/// RY(theta) on three qubits, then 2-control X gates on the overlapping
/// pairs (0,1), (1,2), (0,2), each with its own ancilla.
pub fn overlapping_control_circuit(theta: f64) -> Result<Circuit> {
    let mut c = Circuit::new(6, 0)?;
    for q in 0..3 {
        c.push(Gate::ry(theta, q))?;
    }
    for (a, pair) in [[0, 1], [1, 2], [0, 2]].iter().enumerate() {
        c.push(Gate::mcx(pair.to_vec(), 3 + a))?;
    }
    Ok(c)
}

fn compare(circuit: &Circuit, noise: &NoiseModel, shots: u64, seed: u64) -> Result<f64> {
    let state = run_circuit(circuit)?;
    let ideal = sample_histogram(&probabilities(&state), shots, seed ^ 0x5eed_1dea)?;
    let noisy = run_noisy(circuit, noise, shots, seed)?;
    tvd(&ideal, &noisy)
}

type Params = Vec<(&'static str, serde_json::Value)>;

/// Runs the diagnostic families: independent single-control gates (two and
/// three qubits, Hadamards), the same three-qubit layout with RY at 0.2 pi
/// and 0.45 pi, and control structure at 0.45 pi (one 3-control gate versus
/// three overlapping 2-control gates).
pub fn diagnostic_suite(noise: &NoiseModel, shots: u64, seed: u64) -> Result<DiagnosticReport> {
    NoiseModel::new(noise.p1, noise.p_mc, noise.p_ro)?;
    let h = Gate::H { target: 0 };
    let mut entries: Vec<(String, Circuit, Params)> = Vec::new();
    for qubits in [2usize, 3] {
        entries.push((
            format!("single-control/hadamard/{qubits}q"),
            independent_control_circuit(qubits, &h, &h)?,
            vec![("family", "single-control".into()), ("qubits", qubits.into()), ("controls_per_gate", 1.into())],
        ));
    }
    for frac in [0.2, 0.45] {
        let g = Gate::ry(frac * PI, 0);
        entries.push((
            format!("theta/{frac:.2}pi"),
            independent_control_circuit(3, &g, &g)?,
            vec![("family", "theta".into()), ("theta_pi_units", frac.into()), ("controls_per_gate", 1.into())],
        ));
    }
    entries.push((
        "control/one-3-control".into(),
        three_control_circuit(0.45 * PI)?,
        vec![("family", "control".into()), ("theta_pi_units", 0.45.into()), ("controls_per_gate", 3.into())],
    ));
    entries.push((
        "control/overlapping-2-control".into(),
        overlapping_control_circuit(0.45 * PI)?,
        vec![("family", "control".into()), ("theta_pi_units", 0.45.into()), ("controls_per_gate", 2.into())],
    ));

    let families = entries
        .into_iter()
        .enumerate()
        .map(|(i, (name, circuit, params))| {
            let tvd = compare(&circuit, noise, shots, seed.wrapping_add(i as u64))?;
            Ok(FamilyResult {
                name,
                ideal_vs_noisy_tvd: tvd,
                params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagnosticReport {
        noise: *noise,
        shots,
        seed,
        families,
    })
}
