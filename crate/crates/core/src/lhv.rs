//! Deterministic local-hidden-variable (LHV) oracle.
//!
//! A strategy fixes, for every particle, the outcome of the `U` measurement
//! and the outcome of the `D` measurement. Under a measurement setting it
//! deterministically produces one outcome string: `d_k` for particles
//! measured in `{c, d}` and `u_k` for the rest. A strategy is consistent
//! when every setting in the standard family (`none`, each singleton, `all`)
//! yields an outcome with nonzero quantum probability. Paradox states are
//! the `all`-setting outcomes that quantum mechanics allows but that no
//! consistent strategy produces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{amplitude_vec, normalization_constant, BasisCoeffs};
use crate::bits::{bit, mask, parse_bitstring, to_bitstring};
use crate::config::{interest_states_rule, EntanglerSpec, MeasurementSetting};
use crate::error::{Error, Result};

/// Probabilities above this count as allowed outcomes.
pub const SUPPORT_EPS: f64 = 1e-9;

/// Exhaustive enumeration refuses configurations with more particles.
pub const MAX_ENUMERATION_PARTICLES: usize = 8;

/// Chains kept per target in a [`ParadoxReport`]; the full count is recorded.
pub const REPORT_CHAINS_PER_TARGET: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LhvStrategy {
    n: usize,
    u_bits: usize,
    d_bits: usize,
}

impl LhvStrategy {
    pub fn new(n: usize, u_bits: usize, d_bits: usize) -> Self {
        let m = (1usize << n) - 1;
        Self {
            n,
            u_bits: u_bits & m,
            d_bits: d_bits & m,
        }
    }

    pub fn from_strings(u: &str, d: &str) -> Result<Self> {
        if u.len() != d.len() {
            return Err(Error::InvalidInput("u and d strings differ in length".into()));
        }
        Ok(Self::new(u.len(), parse_bitstring(u)?, parse_bitstring(d)?))
    }

    fn from_index(n: usize, index: usize) -> Self {
        Self::new(n, index >> n, index)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn u_string(&self) -> String {
        to_bitstring(self.u_bits, self.n)
    }

    pub fn d_string(&self) -> String {
        to_bitstring(self.d_bits, self.n)
    }

    fn outcome_index(&self, setting: &MeasurementSetting) -> usize {
        let rev = setting
            .reversed()
            .iter()
            .fold(0usize, |m, &k| m | mask(k - 1, self.n));
        (self.d_bits & rev) | (self.u_bits & !rev)
    }

    /// Outcome string this strategy produces under `setting`.
    pub fn outcome(&self, setting: &MeasurementSetting) -> String {
        to_bitstring(self.outcome_index(setting), self.n)
    }
}

impl fmt::Display for LhvStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u={} d={}", self.u_string(), self.d_string())
    }
}

impl Serialize for LhvStrategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("LhvStrategy", 2)?;
        st.serialize_field("u", &self.u_string())?;
        st.serialize_field("d", &self.d_string())?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportSet {
    pub setting: MeasurementSetting,
    pub support: BTreeSet<String>,
    #[serde(skip)]
    allowed: Vec<bool>,
}

impl SupportSet {
    pub fn contains(&self, outcome: &str) -> bool {
        self.support.contains(outcome)
    }

    fn allows(&self, index: usize) -> bool {
        self.allowed[index]
    }
}

fn probabilities_for(
    spec: &EntanglerSpec,
    theta: f64,
    setting: &MeasurementSetting,
) -> Result<Vec<f64>> {
    let coeffs = BasisCoeffs::uniform(theta, spec.n())?;
    let norm = normalization_constant(spec, &coeffs)?;
    Ok(amplitude_vec(spec, &coeffs, setting, &norm)
        .into_iter()
        .map(|a| a * a)
        .collect())
}

fn support_for(spec: &EntanglerSpec, theta: f64, setting: MeasurementSetting) -> Result<SupportSet> {
    let probs = probabilities_for(spec, theta, &setting)?;
    let allowed: Vec<bool> = probs.iter().map(|&p| p > SUPPORT_EPS).collect();
    let support = allowed
        .iter()
        .enumerate()
        .filter(|(_, a)| **a)
        .map(|(i, _)| to_bitstring(i, spec.n()))
        .collect();
    Ok(SupportSet {
        setting,
        support,
        allowed,
    })
}

/// Supports for `none`, each singleton in particle order, then `all`.
pub fn quantum_supports(spec: &EntanglerSpec, theta: f64) -> Result<Vec<SupportSet>> {
    MeasurementSetting::standard_family(spec.n())
        .into_iter()
        .map(|s| support_for(spec, theta, s))
        .collect()
}

fn check_supports(n: usize, supports: &[SupportSet]) -> Result<()> {
    if n > MAX_ENUMERATION_PARTICLES {
        return Err(Error::EnumerationCap {
            n,
            max: MAX_ENUMERATION_PARTICLES,
        });
    }
    let expected = MeasurementSetting::standard_family(n);
    let given: BTreeSet<&MeasurementSetting> = supports.iter().map(|s| &s.setting).collect();
    if expected.iter().any(|s| !given.contains(s)) || supports.iter().any(|s| s.allowed.len() != 1 << n) {
        return Err(Error::InvalidInput(format!(
            "supports must cover all {} settings for n = {n}",
            n + 2
        )));
    }
    Ok(())
}

/// Per-strategy verdict: `None` when consistent, otherwise the index (into
/// `supports`) of the first setting whose outcome is forbidden.
pub fn strategy_witnesses(n: usize, supports: &[SupportSet]) -> Result<Vec<(LhvStrategy, Option<usize>)>> {
    check_supports(n, supports)?;
    Ok((0..1usize << (2 * n))
        .into_par_iter()
        .map(|i| {
            let strategy = LhvStrategy::from_index(n, i);
            let witness = supports
                .iter()
                .position(|s| !s.allows(strategy.outcome_index(&s.setting)));
            (strategy, witness)
        })
        .collect())
}

/// All `2^(2n)` strategies filtered down to the consistent ones, in index
/// order.
pub fn enumerate_consistent_strategies(n: usize, supports: &[SupportSet]) -> Result<Vec<LhvStrategy>> {
    Ok(strategy_witnesses(n, supports)?
        .into_iter()
        .filter(|(_, w)| w.is_none())
        .map(|(s, _)| s)
        .collect())
}

fn paradox_from_supports(n: usize, supports: &[SupportSet]) -> Result<(BTreeSet<String>, usize)> {
    let consistent = enumerate_consistent_strategies(n, supports)?;
    let all = MeasurementSetting::all(n);
    let reachable: BTreeSet<usize> = consistent.iter().map(|s| s.outcome_index(&all)).collect();
    let all_support = supports
        .iter()
        .find(|s| s.setting == all)
        .expect("checked by check_supports");
    let paradox = (0..1usize << n)
        .filter(|&i| all_support.allows(i) && !reachable.contains(&i))
        .map(|i| to_bitstring(i, n))
        .collect();
    Ok((paradox, consistent.len()))
}

/// `all`-setting outcomes that occur quantum mechanically but are produced
/// by no consistent strategy.
pub fn paradox_states_oracle(spec: &EntanglerSpec, theta: f64) -> Result<BTreeSet<String>> {
    let supports = quantum_supports(spec, theta)?;
    Ok(paradox_from_supports(spec.n(), &supports)?.0)
}

/// What `D_k = 1` forces on the other particles' `U` outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Implication {
    pub particle: usize,
    /// Particles whose `U` is 0 in every allowed pattern.
    pub forced_zero: Vec<usize>,
    /// Particles whose `U` is 1 in every allowed pattern.
    pub forced_one: Vec<usize>,
    /// Each allowed pattern, as the set of other particles with `U = 1`.
    pub options: Vec<Vec<usize>>,
}

impl Implication {
    /// Particles not fixed by the implication.
    pub fn free(&self, n: usize) -> Vec<usize> {
        (1..=n)
            .filter(|&j| j != self.particle && !self.forced_zero.contains(&j) && !self.forced_one.contains(&j))
            .collect()
    }
}

impl fmt::Display for Implication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.particle;
        if self.options.is_empty() {
            return write!(f, "D{k}=1 never occurs");
        }
        let mut clauses: Vec<String> = Vec::new();
        if !self.forced_one.is_empty() {
            let eq: String = self.forced_one.iter().map(|j| format!("U{j}=")).collect();
            clauses.push(format!("{eq}1"));
        }
        if !self.forced_zero.is_empty() {
            let eq: String = self.forced_zero.iter().map(|j| format!("U{j}=")).collect();
            clauses.push(format!("{eq}0"));
        }
        let fixed: BTreeSet<usize> = self.forced_one.iter().copied().collect();
        let free: BTreeSet<usize> = self
            .options
            .iter()
            .flatten()
            .copied()
            .filter(|j| !fixed.contains(j))
            .collect();
        if self.options.len() > 1 {
            // Render "at least one of" when every nonempty subset of the free
            // particles is allowed; otherwise list the patterns.
            let nonempty = (1usize << free.len()) - 1;
            let no_empty = self.options.iter().all(|o| o.iter().any(|j| free.contains(j)));
            if self.options.len() == nonempty && no_empty {
                let ors: Vec<String> = free.iter().map(|j| format!("U{j}=1")).collect();
                clauses.push(format!("({})", ors.join(" ∨ ")));
            } else {
                let ors: Vec<String> = self
                    .options
                    .iter()
                    .map(|o| {
                        let ones: Vec<String> = o.iter().map(|j| format!("U{j}")).collect();
                        format!("{{{}}}", ones.join(","))
                    })
                    .collect();
                clauses.push(format!("U=1 on one of {}", ors.join(" ∨ ")));
            }
        }
        if clauses.is_empty() {
            write!(f, "D{k}=1 ⇒ (no constraint)")
        } else {
            write!(f, "D{k}=1 ⇒ {}", clauses.join(" ∧ "))
        }
    }
}

fn implication_from_support(n: usize, k: usize, support: &SupportSet) -> Implication {
    let patterns: Vec<usize> = (0..1usize << n)
        .filter(|&i| bit(i, k - 1, n) && support.allows(i))
        .collect();
    let others: Vec<usize> = (1..=n).filter(|&j| j != k).collect();
    let (mut forced_zero, mut forced_one) = (Vec::new(), Vec::new());
    if !patterns.is_empty() {
        for &j in &others {
            if patterns.iter().all(|&p| !bit(p, j - 1, n)) {
                forced_zero.push(j);
            } else if patterns.iter().all(|&p| bit(p, j - 1, n)) {
                forced_one.push(j);
            }
        }
    }
    let options = patterns
        .iter()
        .map(|&p| others.iter().copied().filter(|&j| bit(p, j - 1, n)).collect())
        .collect();
    Implication {
        particle: k,
        forced_zero,
        forced_one,
        options,
    }
}

/// Reads the constraints `D_k = 1` places on the other particles' `U`
/// outcomes off the support of the setting that reverses only particle `k`.
pub fn correlation_implications(spec: &EntanglerSpec, theta: f64, k: usize) -> Result<Implication> {
    let n = spec.n();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("particle {k} is outside 1..={n}")));
    }
    let support = support_for(spec, theta, MeasurementSetting::single(k))?;
    Ok(implication_from_support(n, k, &support))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainChoice {
    /// Particle with `D = 1` in the target.
    pub particle: usize,
    /// Partners this choice sets to `U = 1`.
    pub partners_up: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContradictionChain {
    pub target: String,
    pub choices: Vec<ChainChoice>,
    /// `{u, v}` outcome the choices force; always a vanished state.
    #[serde(rename = "violated")]
    pub violated_vanished_state: String,
}

fn chains_from_implications(
    spec: &EntanglerSpec,
    target: &str,
    implications: &[Implication],
) -> Vec<ContradictionChain> {
    let n = spec.n();
    let mut chains = Vec::new();
    let mut pick = vec![0usize; implications.len()];
    if implications.iter().any(|imp| imp.options.is_empty()) {
        return chains;
    }
    loop {
        let forced = implications
            .iter()
            .zip(&pick)
            .flat_map(|(imp, &p)| imp.options[p].iter())
            .fold(0usize, |m, &j| m | mask(j - 1, n));
        if spec.is_vanished_index(forced) {
            chains.push(ContradictionChain {
                target: target.to_string(),
                choices: implications
                    .iter()
                    .zip(&pick)
                    .map(|(imp, &p)| ChainChoice {
                        particle: imp.particle,
                        partners_up: imp.options[p].clone(),
                    })
                    .collect(),
                violated_vanished_state: to_bitstring(forced, n),
            });
        }
        // odometer over one option per implication
        let mut pos = 0;
        loop {
            if pos == pick.len() {
                return chains;
            }
            pick[pos] += 1;
            if pick[pos] < implications[pos].options.len() {
                break;
            }
            pick[pos] = 0;
            pos += 1;
        }
    }
}

/// For a paradox state `target`, walks every selection of one allowed
/// partner pattern per particle with `D = 1` and keeps the selections whose
/// combined `U = 1` assignments land on a vanished outcome.
pub fn contradiction_chains(
    spec: &EntanglerSpec,
    theta: f64,
    target: &str,
) -> Result<Vec<ContradictionChain>> {
    let n = spec.n();
    let idx = parse_bitstring(target)?;
    if target.len() != n {
        return Err(Error::InvalidInput(format!("{target:?} is not an {n}-bit string")));
    }
    let supports = quantum_supports(spec, theta)?;
    let (paradox, _) = paradox_from_supports(n, &supports)?;
    if !paradox.contains(target) {
        return Err(Error::NotAParadoxState(target.to_string()));
    }
    Ok(chains_for_target(spec, &supports, idx))
}

fn chains_for_target(spec: &EntanglerSpec, supports: &[SupportSet], idx: usize) -> Vec<ContradictionChain> {
    let n = spec.n();
    let implications: Vec<Implication> = (1..=n)
        .filter(|&k| bit(idx, k - 1, n))
        .map(|k| {
            let s = supports
                .iter()
                .find(|s| s.setting == MeasurementSetting::single(k))
                .expect("standard family includes every singleton");
            implication_from_support(n, k, s)
        })
        .collect();
    chains_from_implications(spec, &to_bitstring(idx, n), &implications)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParadoxReport {
    pub spec: EntanglerSpec,
    pub theta: f64,
    pub paradox_states: Vec<String>,
    pub p_success: f64,
    pub consistent_count: usize,
    pub strategies_total: usize,
    /// Whether the oracle's paradox set equals the pair-sharing rule set.
    pub rule_agreement: bool,
    /// Number of closing chains per paradox state.
    pub chain_counts: BTreeMap<String, usize>,
    /// Up to [`REPORT_CHAINS_PER_TARGET`] chains per paradox state.
    pub chains: Vec<ContradictionChain>,
}

impl ParadoxReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Full certificate: supports, strategy census, paradox states with their
/// quantum weight, and contradiction chains.
pub fn verify_paradox(spec: &EntanglerSpec, theta: f64) -> Result<ParadoxReport> {
    let n = spec.n();
    if n > MAX_ENUMERATION_PARTICLES {
        return Err(Error::EnumerationCap {
            n,
            max: MAX_ENUMERATION_PARTICLES,
        });
    }
    let supports = quantum_supports(spec, theta)?;
    let (paradox, consistent_count) = paradox_from_supports(n, &supports)?;
    let probs = probabilities_for(spec, theta, &MeasurementSetting::all(n))?;
    let p_success = paradox
        .iter()
        .map(|s| probs[parse_bitstring(s).expect("generated bitstring")])
        .sum();

    let mut chain_counts = BTreeMap::new();
    let mut chains = Vec::new();
    for s in &paradox {
        let all = chains_for_target(spec, &supports, parse_bitstring(s)?);
        chain_counts.insert(s.clone(), all.len());
        chains.extend(all.into_iter().take(REPORT_CHAINS_PER_TARGET));
    }
    Ok(ParadoxReport {
        spec: spec.clone(),
        theta,
        rule_agreement: paradox == interest_states_rule(spec),
        paradox_states: paradox.into_iter().collect(),
        p_success,
        consistent_count,
        strategies_total: 1 << (2 * n),
        chain_counts,
        chains,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::vanished_states;
    use std::f64::consts::PI;

    const THETA: f64 = 0.423 * PI;

    fn cycle4() -> EntanglerSpec {
        EntanglerSpec::cycle(4).unwrap()
    }

    #[test]
    fn supports_cycle4() {
        let s = quantum_supports(&cycle4(), THETA).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s[0].support.len(), 7);
        assert!(vanished_states(&cycle4()).iter().all(|v| !s[0].contains(v)));
        for o in ["0110", "1100", "1110"] {
            assert!(s[2].contains(o), "{o}");
        }
        assert_eq!(s[5].support.len(), 16);
    }

    #[test]
    fn strategy_outcomes() {
        let st = LhvStrategy::from_strings("0100", "1010").unwrap();
        assert_eq!(st.outcome(&MeasurementSetting::none()), "0100");
        assert_eq!(st.outcome(&MeasurementSetting::single(1)), "1100");
        assert_eq!(st.outcome(&MeasurementSetting::single(2)), "0000");
        assert_eq!(st.outcome(&MeasurementSetting::all(4)), "1010");
        assert_eq!(st.to_string(), "u=0100 d=1010");
    }

    #[test]
    fn enumeration_counts_and_examples() {
        let supports = quantum_supports(&cycle4(), THETA).unwrap();
        let verdicts = strategy_witnesses(4, &supports).unwrap();
        assert_eq!(verdicts.len(), 256);
        let consistent = enumerate_consistent_strategies(4, &supports).unwrap();
        assert!(consistent.contains(&LhvStrategy::from_strings("0100", "1010").unwrap()));
        let bad = LhvStrategy::from_strings("1100", "0000").unwrap();
        assert!(!consistent.contains(&bad));
        let (_, w) = verdicts.iter().find(|(s, _)| *s == bad).unwrap();
        assert_eq!(*w, Some(0));
    }

    #[test]
    fn supports_must_cover_family() {
        let supports = quantum_supports(&cycle4(), THETA).unwrap();
        assert!(enumerate_consistent_strategies(4, &supports[..5]).is_err());
        assert!(enumerate_consistent_strategies(3, &supports).is_err());
    }

    #[test]
    fn paradox_cycle4_is_rule_set() {
        let p = paradox_states_oracle(&cycle4(), THETA).unwrap();
        assert_eq!(p, interest_states_rule(&cycle4()));
        assert!(!p.contains("1010") && !p.contains("0101"));
    }

    #[test]
    fn implications_cycle4_and_complete4() {
        let i1 = correlation_implications(&cycle4(), THETA, 1).unwrap();
        assert_eq!(i1.forced_zero, vec![3]);
        assert!(i1.forced_one.is_empty());
        assert_eq!(i1.options.len(), 3);
        assert_eq!(i1.to_string(), "D1=1 ⇒ U3=0 ∧ (U2=1 ∨ U4=1)");

        let i2 = correlation_implications(&cycle4(), THETA, 2).unwrap();
        assert_eq!(i2.to_string(), "D2=1 ⇒ U4=0 ∧ (U1=1 ∨ U3=1)");

        let k4 = EntanglerSpec::complete(4).unwrap();
        let i = correlation_implications(&k4, 0.7 * PI, 1).unwrap();
        assert_eq!(i.forced_one, vec![2, 3, 4]);
        assert_eq!(i.options, vec![vec![2, 3, 4]]);
        assert_eq!(i.to_string(), "D1=1 ⇒ U2=U3=U4=1");
        assert!(correlation_implications(&k4, 0.7 * PI, 5).is_err());
    }

    #[test]
    fn chains_target_1100() {
        let chains = contradiction_chains(&cycle4(), THETA, "1100").unwrap();
        assert_eq!(chains.len(), 9);
        let vanished = vanished_states(&cycle4());
        assert!(chains.iter().all(|c| vanished.contains(&c.violated_vanished_state)));
        let direct = chains
            .iter()
            .find(|c| c.choices[0].partners_up == vec![2] && c.choices[1].partners_up == vec![1])
            .unwrap();
        assert_eq!(direct.violated_vanished_state, "1100");
        assert!(matches!(
            contradiction_chains(&cycle4(), THETA, "1010"),
            Err(Error::NotAParadoxState(_))
        ));
    }

    #[test]
    fn chains_two_particle() {
        let k2 = EntanglerSpec::complete(2).unwrap();
        let chains = contradiction_chains(&k2, 0.5 * PI, "11").unwrap();
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].violated_vanished_state, "11");
    }

    #[test]
    fn report_cycle4() {
        let r = verify_paradox(&cycle4(), THETA).unwrap();
        assert_eq!(r.paradox_states.len(), 9);
        assert!((r.p_success - 0.0902).abs() < 1e-4);
        assert!(r.rule_agreement);
        assert_eq!(r.strategies_total, 256);
        assert_eq!(r.chain_counts["1100"], 9);
        let json = r.to_json().unwrap();
        let back: ParadoxReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_json().unwrap(), json);
    }

    #[test]
    fn report_theta_zero_is_empty() {
        let r = verify_paradox(&cycle4(), 0.0).unwrap();
        assert!(r.paradox_states.is_empty());
        assert_eq!(r.p_success, 0.0);
    }

    #[test]
    fn enumeration_cap() {
        let spec = EntanglerSpec::cycle(10).unwrap();
        assert!(matches!(
            verify_paradox(&spec, THETA),
            Err(Error::EnumerationCap { n: 10, .. })
        ));
    }
}
