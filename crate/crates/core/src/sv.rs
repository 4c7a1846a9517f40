//! Dense statevector simulator.
//!
//! Qubit `q` (0-based) maps to bit `num_qubits - 1 - q` of the amplitude
//! index, so qubit 0 is the leftmost character of every bitstring. Circuits
//! place data qubits first and ancillas after them.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::bits::{mask, to_bitstring};
use crate::error::{Error, Result};

/// Largest register the dense representation accepts (12 data + 12 ancilla).
pub const MAX_QUBITS: usize = 24;

/// Branches lighter than this are treated as impossible rather than round-off.
pub const POSTSELECT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Ry { theta: f64, target: usize },
    X { target: usize },
    H { target: usize },
    Mcx { controls: Vec<usize>, target: usize },
}

impl Gate {
    pub fn ry(theta: f64, target: usize) -> Self {
        Gate::Ry { theta, target }
    }

    pub fn mcx(controls: impl Into<Vec<usize>>, target: usize) -> Self {
        Gate::Mcx {
            controls: controls.into(),
            target,
        }
    }

    pub fn target(&self) -> usize {
        match self {
            Gate::Ry { target, .. }
            | Gate::X { target }
            | Gate::H { target }
            | Gate::Mcx { target, .. } => *target,
        }
    }

    /// Every qubit the gate touches, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Mcx { controls, target } => {
                let mut q = controls.clone();
                q.push(*target);
                q
            }
            other => vec![other.target()],
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    num_qubits,
                });
            }
        }
        if let Gate::Mcx { controls, target } = self {
            if controls.is_empty() {
                return Err(Error::InvalidGate("MCX needs at least one control".into()));
            }
            if controls.contains(target) {
                return Err(Error::InvalidGate(format!(
                    "target {target} is also a control"
                )));
            }
            let mut sorted = controls.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != controls.len() {
                return Err(Error::InvalidGate("repeated control qubit".into()));
            }
        }
        Ok(())
    }
}

/// Single-qubit Pauli operators, used for error injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        check_size(num_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Builds a state from raw amplitudes, renormalizing them.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "amplitude vector length {len} is not a power of two"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_size(num_qubits)?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < POSTSELECT_THRESHOLD {
            return Err(Error::InvalidInput("zero vector".into()));
        }
        Ok(Self {
            num_qubits,
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|amplitude|^2` indexed like the amplitudes.
    pub fn probability_vec(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let n = self.num_qubits;
        match gate {
            Gate::Ry { theta, target } => {
                let (s, c) = (theta / 2.0).sin_cos();
                self.map_pairs(mask(*target, n), |a0, a1| (a0 * c - a1 * s, a0 * s + a1 * c));
            }
            Gate::H { target } => {
                self.map_pairs(mask(*target, n), |a0, a1| {
                    ((a0 + a1) * FRAC_1_SQRT_2, (a0 - a1) * FRAC_1_SQRT_2)
                });
            }
            Gate::X { target } => self.map_pairs(mask(*target, n), |a0, a1| (a1, a0)),
            Gate::Mcx { controls, target } => {
                let ctrl = controls.iter().fold(0usize, |m, &q| m | mask(q, n));
                let t = mask(*target, n);
                for i in 0..self.amplitudes.len() {
                    if i & ctrl == ctrl && i & t == 0 {
                        self.amplitudes.swap(i, i | t);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, qubit: usize, pauli: Pauli) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        let m = mask(qubit, self.num_qubits);
        let i = Complex64::i();
        match pauli {
            Pauli::X => self.map_pairs(m, |a0, a1| (a1, a0)),
            Pauli::Y => self.map_pairs(m, |a0, a1| (-i * a1, i * a0)),
            Pauli::Z => self.map_pairs(m, |a0, a1| (a0, -a1)),
        }
        Ok(())
    }

    fn map_pairs(&mut self, m: usize, f: impl Fn(Complex64, Complex64) -> (Complex64, Complex64)) {
        for i in 0..self.amplitudes.len() {
            if i & m == 0 {
                let (a0, a1) = f(self.amplitudes[i], self.amplitudes[i | m]);
                self.amplitudes[i] = a0;
                self.amplitudes[i | m] = a1;
            }
        }
    }
}

fn check_size(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            requested: num_qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Applies one gate and returns the new state; `state` is left untouched.
pub fn apply_gate(state: &Statevector, gate: &Gate) -> Result<Statevector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub num_data: usize,
    pub num_ancilla: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_data: usize, num_ancilla: usize) -> Result<Self> {
        check_size(num_data + num_ancilla)?;
        Ok(Self {
            num_data,
            num_ancilla,
            gates: Vec::new(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_data + self.num_ancilla
    }

    /// Ancilla qubit indices, which follow the data qubits.
    pub fn ancillas(&self) -> Vec<usize> {
        (self.num_data..self.num_qubits()).collect()
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.num_qubits())?;
        self.gates.push(gate);
        Ok(self)
    }
}

/// Runs every gate in order on `|0...0>`.
pub fn run_circuit(circuit: &Circuit) -> Result<Statevector> {
    let mut state = Statevector::zero(circuit.num_qubits())?;
    for gate in &circuit.gates {
        state.apply(gate)?;
    }
    Ok(state)
}

/// Projects onto the branch where every qubit in `ancillas` reads
/// `required`, drops those qubits and renormalizes. Returns the reduced
/// state with the pre-projection branch weight.
pub fn postselect_ancillas(
    state: &Statevector,
    ancillas: &[usize],
    required: bool,
) -> Result<(Statevector, f64)> {
    let n = state.num_qubits;
    if ancillas.is_empty() {
        return Err(Error::InvalidInput("empty ancilla set".into()));
    }
    let mut anc_mask = 0usize;
    for &q in ancillas {
        if q >= n {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                num_qubits: n,
            });
        }
        anc_mask |= mask(q, n);
    }
    let kept: Vec<usize> = (0..n).filter(|&q| anc_mask & mask(q, n) == 0).collect();
    if kept.is_empty() {
        return Err(Error::InvalidInput(
            "ancilla set covers the whole register".into(),
        ));
    }
    let want = if required { anc_mask } else { 0 };
    let m = kept.len();
    let mut reduced = vec![Complex64::new(0.0, 0.0); 1 << m];
    let mut weight = 0.0;
    for (i, amp) in state.amplitudes.iter().enumerate() {
        if i & anc_mask != want {
            continue;
        }
        let j = kept
            .iter()
            .enumerate()
            .filter(|(_, &q)| i & mask(q, n) != 0)
            .fold(0usize, |acc, (pos, _)| acc | mask(pos, m));
        reduced[j] = *amp;
        weight += amp.norm_sqr();
    }
    if weight < POSTSELECT_THRESHOLD {
        return Err(Error::PostSelectionImpossible { weight });
    }
    let scale = weight.sqrt();
    for a in &mut reduced {
        *a /= scale;
    }
    Ok((
        Statevector {
            num_qubits: m,
            amplitudes: reduced,
        },
        weight,
    ))
}

/// `|amplitude|^2` for every basis string, including zeros.
pub fn probabilities(state: &Statevector) -> BTreeMap<String, f64> {
    state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, a)| (to_bitstring(i, state.num_qubits), a.norm_sqr()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub num_bits: usize,
    /// Nonzero counts only; absent keys have count 0.
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
    pub post_selection_rate: f64,
}

impl Histogram {
    pub fn empty(num_bits: usize) -> Self {
        Self {
            num_bits,
            counts: BTreeMap::new(),
            shots: 0,
            post_selection_rate: 1.0,
        }
    }

    pub fn count(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn frequency(&self, key: &str) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.count(key) as f64 / self.shots as f64
        }
    }

    pub fn record(&mut self, key: String, n: u64) {
        if n > 0 {
            *self.counts.entry(key).or_insert(0) += n;
            self.shots += n;
        }
    }

    /// Adds another histogram's counts. Order of merging does not matter.
    pub fn merge(&mut self, other: &Histogram) {
        for (k, &v) in &other.counts {
            self.record(k.clone(), v);
        }
    }
}

/// Multinomial draw of `shots` outcomes, performed as a chain of
/// conditional binomials over the keys in sorted order. Identical inputs
/// give identical histograms.
pub fn sample_histogram(
    probabilities: &BTreeMap<String, f64>,
    shots: u64,
    seed: u64,
) -> Result<Histogram> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be at least 1".into()));
    }
    let num_bits = probabilities.keys().next().map_or(0, |k| k.len());
    if probabilities.keys().any(|k| k.len() != num_bits) {
        return Err(Error::InvalidInput("mixed key lengths".into()));
    }
    let total: f64 = probabilities.values().map(|p| p.max(0.0)).sum();
    if total <= 0.0 {
        return Err(Error::InvalidInput("probabilities sum to zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = Histogram::empty(num_bits);
    let mut remaining_shots = shots;
    let mut remaining_mass = total;
    let last = probabilities.iter().rev().find(|(_, &p)| p > 0.0).map(|(k, _)| k);
    for (key, &p) in probabilities {
        if remaining_shots == 0 {
            break;
        }
        let p = p.max(0.0);
        if p == 0.0 {
            continue;
        }
        let draw = if Some(key) == last {
            remaining_shots
        } else {
            let q = (p / remaining_mass).clamp(0.0, 1.0);
            Binomial::new(remaining_shots, q)
                .expect("probability clamped to [0, 1]")
                .sample(&mut rng)
        };
        hist.record(key.clone(), draw);
        remaining_shots -= draw;
        remaining_mass -= p;
    }
    Ok(hist)
}
