//! Entanglement configurations expressed as Toffoli control sets.
//!
//! Every control set drives its own ancilla; an outcome in the `{u, v}`
//! bases vanishes after post-selection when some control set reads all ones.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::{mask, to_bitstring};
use crate::error::{Error, Result};
use crate::sv::{Circuit, Gate, MAX_QUBITS};

/// Largest particle count any configuration may declare.
pub const MAX_PARTICLES: usize = MAX_QUBITS / 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecKind {
    Cycle,
    Complete,
    Custom(Vec<Vec<usize>>),
}

/// Particle count plus 1-based control sets; serializes to
/// `{"n": int, "control_sets": [[int, ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct EntanglerSpec {
    n: usize,
    control_sets: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawSpec {
    n: usize,
    control_sets: Vec<Vec<usize>>,
}

impl TryFrom<RawSpec> for EntanglerSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        EntanglerSpec::custom(raw.n, raw.control_sets)
    }
}

pub fn make_spec(kind: SpecKind, n: usize) -> Result<EntanglerSpec> {
    match kind {
        SpecKind::Cycle => EntanglerSpec::cycle(n),
        SpecKind::Complete => EntanglerSpec::complete(n),
        SpecKind::Custom(sets) => EntanglerSpec::custom(n, sets),
    }
}

impl EntanglerSpec {
    /// Ring of neighbouring pairs `(1,2), (2,3), ..., (n,1)`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidSpec(format!("cycle needs n >= 3, got {n}")));
        }
        let sets = (1..=n).map(|k| vec![k, k % n + 1]).collect();
        Self::custom(n, sets)
    }

    /// A single control set covering every particle.
    pub fn complete(n: usize) -> Result<Self> {
        Self::custom(n, vec![(1..=n).collect()])
    }

    pub fn custom(n: usize, control_sets: Vec<Vec<usize>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSpec(format!("need n >= 2, got {n}")));
        }
        if n > MAX_PARTICLES || n + control_sets.len() > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                requested: n + control_sets.len(),
                max: MAX_QUBITS,
            });
        }
        if control_sets.is_empty() {
            return Err(Error::InvalidSpec("no control sets".into()));
        }
        let mut seen = BTreeSet::new();
        for set in &control_sets {
            if set.len() < 2 {
                return Err(Error::InvalidSpec(format!(
                    "control set {set:?} has fewer than 2 members"
                )));
            }
            if let Some(bad) = set.iter().find(|&&k| k == 0 || k > n) {
                return Err(Error::InvalidSpec(format!(
                    "particle {bad} in {set:?} is outside 1..={n}"
                )));
            }
            let sorted: BTreeSet<usize> = set.iter().copied().collect();
            if sorted.len() != set.len() {
                return Err(Error::InvalidSpec(format!(
                    "control set {set:?} repeats a particle"
                )));
            }
            if !seen.insert(sorted) {
                return Err(Error::InvalidSpec(format!(
                    "control set {set:?} appears twice"
                )));
            }
        }
        Ok(Self { n, control_sets })
    }

    /// Resolves `cycleN` / `completeN` (e.g. `cycle4`, `complete3`).
    pub fn from_name(name: &str) -> Result<Self> {
        let parse = |digits: &str| {
            digits
                .parse::<usize>()
                .map_err(|_| Error::InvalidSpec(format!("unknown builtin spec {name:?}")))
        };
        if let Some(d) = name.strip_prefix("cycle") {
            Self::cycle(parse(d)?)
        } else if let Some(d) = name.strip_prefix("complete") {
            Self::complete(parse(d)?)
        } else {
            Err(Error::InvalidSpec(format!("unknown builtin spec {name:?}")))
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn control_sets(&self) -> &[Vec<usize>] {
        &self.control_sets
    }

    pub fn num_ancillas(&self) -> usize {
        self.control_sets.len()
    }

    pub fn is_complete(&self) -> bool {
        self.control_sets.len() == 1 && self.control_sets[0].len() == self.n
    }

    pub fn is_pairwise(&self) -> bool {
        self.control_sets.iter().all(|s| s.len() == 2)
    }

    /// Bit masks over n-bit outcome indices, one per control set.
    pub(crate) fn control_masks(&self) -> Vec<usize> {
        self.control_sets
            .iter()
            .map(|set| set.iter().fold(0, |m, &k| m | mask(k - 1, self.n)))
            .collect()
    }

    /// `true` at index `i` when outcome `i` fires some control set.
    pub(crate) fn vanished_table(&self) -> Vec<bool> {
        let masks = self.control_masks();
        (0..1usize << self.n)
            .map(|i| masks.iter().any(|&m| m & !i == 0))
            .collect()
    }

    pub(crate) fn is_vanished_index(&self, index: usize) -> bool {
        self.control_masks().iter().any(|&m| m & !index == 0)
    }
}

impl fmt::Display for EntanglerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sets: Vec<String> = self
            .control_sets
            .iter()
            .map(|s| {
                let inner: Vec<String> = s.iter().map(|k| k.to_string()).collect();
                format!("({})", inner.join(","))
            })
            .collect();
        write!(f, "n={} {{{}}}", self.n, sets.join(","))
    }
}

/// Outcomes in which at least one control set is all ones.
pub fn vanished_states(spec: &EntanglerSpec) -> BTreeSet<String> {
    spec.vanished_table()
        .into_iter()
        .enumerate()
        .filter(|(_, v)| *v)
        .map(|(i, _)| to_bitstring(i, spec.n))
        .collect()
}

/// Outcomes in which two distinct particles sharing a control set both read 1.
///
/// For pairwise configurations this equals [`vanished_states`]; for the
/// complete configuration it is every string with at least two ones. Other
/// custom configurations get the same rule, which the LHV oracle checks.
pub fn interest_states_rule(spec: &EntanglerSpec) -> BTreeSet<String> {
    let n = spec.n;
    let partners: Vec<(usize, usize)> = spec
        .control_sets
        .iter()
        .flat_map(|set| {
            set.iter().enumerate().flat_map(move |(a, &i)| {
                set[a + 1..].iter().map(move |&j| (mask(i - 1, n), mask(j - 1, n)))
            })
        })
        .collect();
    (0..1usize << n)
        .filter(|&s| partners.iter().any(|&(a, b)| s & a != 0 && s & b != 0))
        .map(|s| to_bitstring(s, n))
        .collect()
}

/// Which particles are measured in the `{c, d}` basis (given the reverse
/// rotation); the rest are measured in `{u, v}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasurementSetting {
    reversed: BTreeSet<usize>,
}

impl MeasurementSetting {
    /// Every particle in `{u, v}` (first condition set).
    pub fn none() -> Self {
        Self {
            reversed: BTreeSet::new(),
        }
    }

    /// Only particle `k` (1-based) in `{c, d}` (second condition set).
    pub fn single(k: usize) -> Self {
        Self {
            reversed: BTreeSet::from([k]),
        }
    }

    /// Every particle in `{c, d}` (third condition set).
    pub fn all(n: usize) -> Self {
        Self {
            reversed: (1..=n).collect(),
        }
    }

    pub fn new(reversed: impl IntoIterator<Item = usize>, n: usize) -> Result<Self> {
        let reversed: BTreeSet<usize> = reversed.into_iter().collect();
        if let Some(bad) = reversed.iter().find(|&&k| k == 0 || k > n) {
            return Err(Error::InvalidInput(format!(
                "particle {bad} is outside 1..={n}"
            )));
        }
        Ok(Self { reversed })
    }

    pub fn reversed(&self) -> &BTreeSet<usize> {
        &self.reversed
    }

    pub fn is_reversed(&self, k: usize) -> bool {
        self.reversed.contains(&k)
    }

    /// `none`, each singleton in particle order, then `all`.
    pub fn standard_family(n: usize) -> Vec<Self> {
        std::iter::once(Self::none())
            .chain((1..=n).map(Self::single))
            .chain(std::iter::once(Self::all(n)))
            .collect()
    }

    pub fn label(&self, n: usize) -> String {
        match self.reversed.len() {
            0 => "set1".to_string(),
            1 => format!("set2:{}", self.reversed.iter().next().unwrap()),
            k if k == n => "set3".to_string(),
            _ => {
                let v: Vec<String> = self.reversed.iter().map(|k| k.to_string()).collect();
                format!("custom:{}", v.join(","))
            }
        }
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::PI + 1e-12).contains(&theta) || theta.is_nan() {
        return Err(Error::ThetaOutOfRange(theta));
    }
    Ok(())
}

/// RY(theta) on each data qubit, one MCX per control set onto its own
/// ancilla, then RY(-theta) on every reversed particle.
pub fn build_circuit(
    spec: &EntanglerSpec,
    theta: f64,
    setting: &MeasurementSetting,
) -> Result<Circuit> {
    check_theta(theta)?;
    let n = spec.n;
    if let Some(&bad) = setting.reversed.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::InvalidInput(format!(
            "particle {bad} is outside 1..={n}"
        )));
    }
    let mut circuit = Circuit::new(n, spec.num_ancillas())?;
    for q in 0..n {
        circuit.push(Gate::ry(theta, q))?;
    }
    for (a, set) in spec.control_sets.iter().enumerate() {
        let controls: Vec<usize> = set.iter().map(|k| k - 1).collect();
        circuit.push(Gate::mcx(controls, n + a))?;
    }
    for &k in &setting.reversed {
        circuit.push(Gate::ry(-theta, k - 1))?;
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(strs: &[&str]) -> BTreeSet<String> {
        strs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn builtin_shapes() {
        let c4 = EntanglerSpec::cycle(4).unwrap();
        assert_eq!(
            c4.control_sets(),
            &[vec![1, 2], vec![2, 3], vec![3, 4], vec![4, 1]]
        );
        assert_eq!(EntanglerSpec::complete(4).unwrap().control_sets(), &[vec![1, 2, 3, 4]]);
        assert_eq!(EntanglerSpec::complete(2).unwrap().control_sets(), &[vec![1, 2]]);
        assert_eq!(make_spec(SpecKind::Cycle, 4).unwrap(), c4);
        assert_eq!(EntanglerSpec::from_name("cycle4").unwrap(), c4);
        assert!(EntanglerSpec::from_name("ring4").is_err());
        assert!(EntanglerSpec::cycle(2).is_err());
        assert!(EntanglerSpec::complete(1).is_err());
    }

    #[test]
    fn custom_validation() {
        assert!(EntanglerSpec::custom(3, vec![vec![1]]).is_err());
        assert!(EntanglerSpec::custom(3, vec![vec![1, 4]]).is_err());
        assert!(EntanglerSpec::custom(3, vec![vec![1, 1]]).is_err());
        assert!(EntanglerSpec::custom(3, vec![vec![1, 2], vec![2, 1]]).is_err());
        assert!(EntanglerSpec::custom(3, vec![]).is_err());
        assert!(EntanglerSpec::custom(3, vec![vec![1, 2], vec![2, 3]]).is_ok());
    }

    #[test]
    fn json_schema() {
        let s = EntanglerSpec::from_json_str(r#"{"n": 3, "control_sets": [[1,2],[2,3]]}"#).unwrap();
        assert_eq!(s.n(), 3);
        let back = serde_json::to_string(&s).unwrap();
        assert_eq!(back, r#"{"n":3,"control_sets":[[1,2],[2,3]]}"#);
        assert!(EntanglerSpec::from_json_str(r#"{"n": 3, "control_sets": [[1]]}"#).is_err());
    }

    #[test]
    fn vanished_cycle4_matches_listed_nine() {
        let v = vanished_states(&EntanglerSpec::cycle(4).unwrap());
        assert_eq!(
            v,
            set(&["0011", "0110", "0111", "1001", "1011", "1100", "1101", "1110", "1111"])
        );
    }

    #[test]
    fn vanished_complete_and_cycle3() {
        assert_eq!(vanished_states(&EntanglerSpec::complete(4).unwrap()), set(&["1111"]));
        assert_eq!(
            vanished_states(&EntanglerSpec::cycle(3).unwrap()),
            set(&["011", "101", "110", "111"])
        );
    }

    #[test]
    fn interest_rule() {
        let c4 = EntanglerSpec::cycle(4).unwrap();
        assert_eq!(interest_states_rule(&c4), vanished_states(&c4));
        let k4 = interest_states_rule(&EntanglerSpec::complete(4).unwrap());
        assert_eq!(k4.len(), 11);
        assert!(k4.iter().all(|s| s.matches('1').count() >= 2));
        assert_eq!(interest_states_rule(&EntanglerSpec::complete(2).unwrap()), set(&["11"]));
    }

    #[test]
    fn circuits_per_setting() {
        let c4 = EntanglerSpec::cycle(4).unwrap();
        let theta = 0.423 * std::f64::consts::PI;
        let count = |c: &Circuit, f: &dyn Fn(&Gate) -> bool| c.gates.iter().filter(|g| f(g)).count();
        let fwd = |g: &Gate| matches!(g, Gate::Ry { theta: t, .. } if *t > 0.0);
        let rev = |g: &Gate| matches!(g, Gate::Ry { theta: t, .. } if *t < 0.0);
        let tof = |g: &Gate| matches!(g, Gate::Mcx { .. });

        let c = build_circuit(&c4, theta, &MeasurementSetting::none()).unwrap();
        assert_eq!((count(&c, &fwd), count(&c, &tof), count(&c, &rev)), (4, 4, 0));
        assert_eq!((c.num_data, c.num_ancilla), (4, 4));

        let c = build_circuit(&c4, theta, &MeasurementSetting::single(1)).unwrap();
        assert_eq!(count(&c, &rev), 1);
        assert_eq!(c.gates.last(), Some(&Gate::ry(-theta, 0)));

        let c = build_circuit(&c4, theta, &MeasurementSetting::all(4)).unwrap();
        assert_eq!(count(&c, &rev), 4);

        assert!(build_circuit(&c4, 4.0, &MeasurementSetting::none()).is_err());
        assert!(build_circuit(&c4, 1.0, &MeasurementSetting::single(5)).is_err());
    }

    #[test]
    fn setting_family_and_labels() {
        let fam = MeasurementSetting::standard_family(4);
        assert_eq!(fam.len(), 6);
        assert_eq!(fam[0].label(4), "set1");
        assert_eq!(fam[2].label(4), "set2:2");
        assert_eq!(fam[5].label(4), "set3");
        assert!(MeasurementSetting::new([0], 4).is_err());
    }

    /// Necklace count: n-bit cyclic strings containing a cyclically
    /// adjacent pair of ones, counted by brute force.
    #[test]
    fn vanished_cycle_counts_brute_force() {
        for n in 3..=8 {
            let expected = (0..1usize << n)
                .filter(|&s| {
                    let b: Vec<bool> = (0..n).map(|k| s >> k & 1 == 1).collect();
                    (0..n).any(|k| b[k] && b[(k + 1) % n])
                })
                .count();
            assert_eq!(vanished_states(&EntanglerSpec::cycle(n).unwrap()).len(), expected);
            assert_eq!(vanished_states(&EntanglerSpec::complete(n).unwrap()).len(), 1);
        }
    }
}
