//! Closed-form amplitudes of the post-selected state.
//!
//! The post-selected state is the product state `|c_1 ... c_n>` with every
//! vanished `{u, v}` term removed, scaled by `N = 1/sqrt(1 + C)`. Each
//! particle uses the real basis relations
//!
//! ```text
//! |u> = A|c> - B|d>      |c> = A|u> + B|v>
//! |v> = B|c> + A|d>      |d> = -B|u> + A|v>
//! ```
//!
//! with `A = sin(theta/2)` and `B = cos(theta/2)`. Amplitudes in any
//! measurement setting follow by projecting onto the setting's bases.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::{bit, parse_bitstring, to_bitstring};
use crate::config::{check_theta, EntanglerSpec, MeasurementSetting};
use crate::error::{Error, Result};

/// Below this `1 + C` the post-selected branch is treated as empty.
pub const DEGENERATE_THRESHOLD: f64 = 1e-12;

/// Number of points used by [`sweep_theta_fine`] unless told otherwise.
pub const FINE_GRID_POINTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisCoeffs {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl BasisCoeffs {
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Same angle on every one of `n` particles.
    pub fn uniform(theta: f64, n: usize) -> Result<Self> {
        coeffs_from_theta(&vec![theta; n])
    }
}

/// `A_k = sin(theta_k / 2)`, `B_k = cos(theta_k / 2)`, each angle in `[0, pi]`.
pub fn coeffs_from_theta(thetas: &[f64]) -> Result<BasisCoeffs> {
    let mut a = Vec::with_capacity(thetas.len());
    let mut b = Vec::with_capacity(thetas.len());
    for &t in thetas {
        check_theta(t)?;
        let (s, c) = (t.min(PI) / 2.0).sin_cos();
        a.push(s);
        b.push(c.max(0.0));
    }
    Ok(BasisCoeffs { a, b })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationResult {
    /// Minus the total `{u, v}` weight of the vanished outcomes.
    pub c: f64,
    /// `1 / sqrt(1 + C)`.
    pub n: f64,
}

impl NormalizationResult {
    /// `1 + C`, which is also the probability that post-selection succeeds.
    pub fn branch_weight(&self) -> f64 {
        1.0 + self.c
    }
}

fn check_coeffs(spec: &EntanglerSpec, coeffs: &BasisCoeffs) -> Result<()> {
    if coeffs.len() != spec.n() {
        return Err(Error::InvalidInput(format!(
            "{} basis coefficients for {} particles",
            coeffs.len(),
            spec.n()
        )));
    }
    Ok(())
}

/// Weight of `{u,v}` outcome `index` in the product state `|c...c>`:
/// `prod_k (A_k^2 if bit k is u else B_k^2)`.
fn product_weight(index: usize, coeffs: &BasisCoeffs) -> f64 {
    let n = coeffs.len();
    (0..n)
        .map(|k| if bit(index, k, n) { coeffs.a[k].powi(2) } else { coeffs.b[k].powi(2) })
        .product()
}

/// `C = -sum over vanished outcomes of their product-state weight`.
pub fn normalization_constant(
    spec: &EntanglerSpec,
    coeffs: &BasisCoeffs,
) -> Result<NormalizationResult> {
    check_coeffs(spec, coeffs)?;
    let c = -spec
        .vanished_table()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v)
        .map(|(i, _)| product_weight(i, coeffs))
        .sum::<f64>();
    let one_plus_c = 1.0 + c;
    if one_plus_c <= DEGENERATE_THRESHOLD {
        return Err(Error::DegeneratePostSelection { one_plus_c });
    }
    Ok(NormalizationResult {
        c,
        n: 1.0 / one_plus_c.sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeMap {
    pub setting: MeasurementSetting,
    /// Real amplitude of every outcome string, zeros included.
    pub entries: BTreeMap<String, f64>,
}

impl AmplitudeMap {
    pub fn probability(&self, outcome: &str) -> f64 {
        self.entries.get(outcome).map_or(0.0, |a| a * a)
    }

    pub fn probabilities(&self) -> BTreeMap<String, f64> {
        self.entries.iter().map(|(k, a)| (k.clone(), a * a)).collect()
    }

    /// Outcomes whose probability exceeds `eps`.
    pub fn support(&self, eps: f64) -> BTreeSet<String> {
        self.entries
            .iter()
            .filter(|(_, a)| *a * *a > eps)
            .map(|(k, _)| k.clone())
            .collect()
    }
}

/// Overlap `<outcome|c>` for one particle.
fn overlap_with_c(reversed: bool, outcome: bool, a: f64, b: f64) -> f64 {
    match (reversed, outcome) {
        (false, true) => a,
        (false, false) => b,
        (true, false) => 1.0,
        (true, true) => 0.0,
    }
}

/// Overlap `<outcome|u>` (`is_u`) or `<outcome|v>` for one particle.
fn overlap_with_uv(reversed: bool, outcome: bool, is_u: bool, a: f64, b: f64) -> f64 {
    match (reversed, outcome, is_u) {
        (false, o, u) => f64::from(u8::from(o == u)),
        (true, false, true) => a,
        (true, true, true) => -b,
        (true, false, false) => b,
        (true, true, false) => a,
    }
}

pub(crate) fn amplitude_vec(
    spec: &EntanglerSpec,
    coeffs: &BasisCoeffs,
    setting: &MeasurementSetting,
    norm: &NormalizationResult,
) -> Vec<f64> {
    let n = spec.n();
    let (a, b) = (&coeffs.a, &coeffs.b);
    let rev: Vec<bool> = (1..=n).map(|k| setting.is_reversed(k)).collect();
    let fixed_mask = (0..n)
        .filter(|&k| !rev[k])
        .fold(0usize, |m, k| m | crate::bits::mask(k, n));
    let vanished: Vec<(usize, f64)> = spec
        .vanished_table()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v)
        .map(|(i, _)| {
            let coef: f64 = (0..n).map(|k| if bit(i, k, n) { a[k] } else { b[k] }).product();
            (i, coef)
        })
        .collect();

    (0..1usize << n)
        .map(|s| {
            let product: f64 = (0..n)
                .map(|k| overlap_with_c(rev[k], bit(s, k, n), a[k], b[k]))
                .product();
            let removed: f64 = vanished
                .iter()
                .filter(|(v, _)| (v ^ s) & fixed_mask == 0)
                .map(|&(v, coef)| {
                    coef * (0..n)
                        .map(|k| overlap_with_uv(rev[k], bit(s, k, n), bit(v, k, n), a[k], b[k]))
                        .product::<f64>()
                })
                .sum();
            norm.n * (product - removed)
        })
        .collect()
}

/// Amplitude of every outcome when the particles in the setting's reversed
/// set are measured in `{c, d}` and the rest in `{u, v}`.
pub fn amplitudes_for_setting(
    spec: &EntanglerSpec,
    coeffs: &BasisCoeffs,
    setting: &MeasurementSetting,
) -> Result<AmplitudeMap> {
    let norm = normalization_constant(spec, coeffs)?;
    if let Some(&bad) = setting.reversed().iter().find(|&&k| k > spec.n()) {
        return Err(Error::InvalidInput(format!("particle {bad} out of range")));
    }
    let n = spec.n();
    let entries = amplitude_vec(spec, coeffs, setting, &norm)
        .into_iter()
        .enumerate()
        .map(|(i, amp)| (to_bitstring(i, n), amp))
        .collect();
    Ok(AmplitudeMap {
        setting: setting.clone(),
        entries,
    })
}

/// Total `{c, d}`-basis probability of the `interest` outcomes.
pub fn p_success_analytic(
    spec: &EntanglerSpec,
    coeffs: &BasisCoeffs,
    interest: &BTreeSet<String>,
) -> Result<f64> {
    let n = spec.n();
    let indices = interest_indices(interest, n)?;
    let norm = normalization_constant(spec, coeffs)?;
    let amps = amplitude_vec(spec, coeffs, &MeasurementSetting::all(n), &norm);
    Ok(indices.iter().map(|&i| amps[i] * amps[i]).sum())
}

fn interest_indices(interest: &BTreeSet<String>, n: usize) -> Result<Vec<usize>> {
    interest
        .iter()
        .map(|s| {
            if s.len() != n {
                return Err(Error::InvalidInput(format!(
                    "outcome {s:?} is not an {n}-bit string"
                )));
            }
            parse_bitstring(s)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub theta: f64,
    pub p_success: f64,
    /// Set when post-selection is impossible at this angle; `p_success` is 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub grid: Vec<SweepPoint>,
    pub argmax_theta: f64,
    pub max_p: f64,
    /// Parabolic refinement around the grid maximum (fine mode only).
    pub refined: Option<(f64, f64)>,
}

impl SweepResult {
    fn from_grid(grid: Vec<SweepPoint>) -> Self {
        let best = grid
            .iter()
            .copied()
            .fold(None::<SweepPoint>, |acc, p| match acc {
                Some(b) if b.p_success >= p.p_success => Some(b),
                _ => Some(p),
            })
            .expect("grid is never empty");
        Self {
            grid,
            argmax_theta: best.theta,
            max_p: best.p_success,
            refined: None,
        }
    }

    /// Best known `(theta, p_success)`, refined when available.
    pub fn best(&self) -> (f64, f64) {
        self.refined.unwrap_or((self.argmax_theta, self.max_p))
    }

    /// Writes `theta_rad,theta_pi_units,p_success` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "theta_rad,theta_pi_units,p_success")?;
        for p in &self.grid {
            writeln!(out, "{:.10},{:.10},{:.10}", p.theta, p.theta / PI, p.p_success)?;
        }
        Ok(())
    }
}

fn evaluate(spec: &EntanglerSpec, indices: &[usize], theta: f64) -> Result<SweepPoint> {
    let coeffs = BasisCoeffs::uniform(theta, spec.n())?;
    match normalization_constant(spec, &coeffs) {
        Ok(norm) => {
            let amps = amplitude_vec(spec, &coeffs, &MeasurementSetting::all(spec.n()), &norm);
            Ok(SweepPoint {
                theta,
                p_success: indices.iter().map(|&i| amps[i] * amps[i]).sum(),
                degenerate: false,
            })
        }
        Err(Error::DegeneratePostSelection { .. }) => Ok(SweepPoint {
            theta,
            p_success: 0.0,
            degenerate: true,
        }),
        Err(e) => Err(e),
    }
}

fn check_range(start: f64, end: f64) -> Result<()> {
    if !(start >= 0.0 && start < end && end <= PI + 1e-12) {
        return Err(Error::InvalidRange(format!(
            "need 0 <= start < end <= pi, got [{start}, {end}]"
        )));
    }
    Ok(())
}

fn run_grid(spec: &EntanglerSpec, interest: &BTreeSet<String>, thetas: Vec<f64>) -> Result<SweepResult> {
    let indices = interest_indices(interest, spec.n())?;
    let grid = thetas
        .into_par_iter()
        .map(|t| evaluate(spec, &indices, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::from_grid(grid))
}

/// Evaluates `p_success` on `start, start + step, ...` up to and including
/// `end` (within round-off).
pub fn sweep_theta(
    spec: &EntanglerSpec,
    interest: &BTreeSet<String>,
    start: f64,
    end: f64,
    step: f64,
) -> Result<SweepResult> {
    check_range(start, end)?;
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidRange(format!("step must be positive, got {step}")));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    let thetas = (0..count)
        .map(|i| (start + i as f64 * step).min(end).min(PI))
        .collect();
    run_grid(spec, interest, thetas)
}

/// Uniform grid of `points` angles over `[start, end]`, followed by a
/// three-point parabolic refinement of the maximum.
pub fn sweep_theta_fine(
    spec: &EntanglerSpec,
    interest: &BTreeSet<String>,
    start: f64,
    end: f64,
    points: usize,
) -> Result<SweepResult> {
    check_range(start, end)?;
    if points < 3 {
        return Err(Error::InvalidRange("fine grid needs at least 3 points".into()));
    }
    let h = (end - start) / (points - 1) as f64;
    let thetas = (0..points).map(|i| (start + i as f64 * h).min(PI)).collect();
    let mut result = run_grid(spec, interest, thetas)?;
    let k = result
        .grid
        .iter()
        .position(|p| p.theta == result.argmax_theta)
        .expect("argmax is on the grid");
    if k > 0 && k + 1 < result.grid.len() {
        let (y0, y1, y2) = (
            result.grid[k - 1].p_success,
            result.grid[k].p_success,
            result.grid[k + 1].p_success,
        );
        let denom = y0 - 2.0 * y1 + y2;
        if denom < 0.0 {
            let offset = 0.5 * (y0 - y2) / denom;
            let theta = result.grid[k].theta + offset.clamp(-1.0, 1.0) * h;
            let indices = interest_indices(interest, spec.n())?;
            let p = evaluate(spec, &indices, theta)?;
            if p.p_success >= y1 {
                result.refined = Some((theta, p.p_success));
            }
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{interest_states_rule, vanished_states};

    const THETA: f64 = 0.423 * PI;

    fn cycle4() -> EntanglerSpec {
        EntanglerSpec::cycle(4).unwrap()
    }

    #[test]
    fn coeffs_reference_angles() {
        let c = coeffs_from_theta(&[THETA, 0.0, PI]).unwrap();
        assert!((c.a()[0] - 0.617).abs() < 5e-4);
        assert!((c.b()[0] - 0.786).abs() < 1.5e-3);
        assert_eq!((c.a()[1], c.b()[1]), (0.0, 1.0));
        assert!((c.a()[2] - 1.0).abs() < 1e-15 && c.b()[2].abs() < 1e-15);
        for k in 0..3 {
            assert!((c.a()[k].powi(2) + c.b()[k].powi(2) - 1.0).abs() < 1e-12);
        }
        assert!(coeffs_from_theta(&[-0.1]).is_err());
        assert!(coeffs_from_theta(&[3.5]).is_err());
    }

    /// The nine-term expression written out for the ring of four, with
    /// per-particle coefficients.
    fn nine_term_c(a: &[f64], b: &[f64]) -> f64 {
        let (a1, a2, a3, a4) = (a[0] * a[0], a[1] * a[1], a[2] * a[2], a[3] * a[3]);
        let (b1, b2, b3, b4) = (b[0] * b[0], b[1] * b[1], b[2] * b[2], b[3] * b[3]);
        -(a1 * a2 * a3 * a4
            + a1 * a2 * a3 * b4
            + a1 * a2 * b3 * a4
            + a1 * a2 * b3 * b4
            + b1 * a2 * a3 * b4
            + b1 * a2 * a3 * a4
            + b1 * b2 * a3 * a4
            + a1 * b2 * a3 * a4
            + a1 * b2 * b3 * a4)
    }

    #[test]
    fn normalization_matches_nine_terms() {
        let thetas = [0.3, 1.1, 1.7, 2.4];
        let c = coeffs_from_theta(&thetas).unwrap();
        let norm = normalization_constant(&cycle4(), &c).unwrap();
        assert!((norm.c - nine_term_c(c.a(), c.b())).abs() < 1e-15);

        let c = BasisCoeffs::uniform(THETA, 4).unwrap();
        let norm = normalization_constant(&cycle4(), &c).unwrap();
        assert!((norm.n - 1.0 / (1.0 + norm.c).sqrt()).abs() < 1e-15);
        assert!((norm.n - 1.269_291_744).abs() < 1e-8);
    }

    #[test]
    fn normalization_edges() {
        for spec in [cycle4(), EntanglerSpec::complete(3).unwrap()] {
            let norm = normalization_constant(&spec, &BasisCoeffs::uniform(0.0, spec.n()).unwrap())
                .unwrap();
            assert_eq!(norm.c, 0.0);
            assert_eq!(norm.n, 1.0);
        }
        assert!(matches!(
            normalization_constant(&cycle4(), &BasisCoeffs::uniform(PI, 4).unwrap()),
            Err(Error::DegeneratePostSelection { .. })
        ));
        assert!(normalization_constant(&cycle4(), &BasisCoeffs::uniform(1.0, 3).unwrap()).is_err());
    }

    #[test]
    fn setting_supports_and_reference_entries() {
        let c = BasisCoeffs::uniform(THETA, 4).unwrap();
        let (a, b) = (c.a()[0], c.b()[0]);
        let n2 = normalization_constant(&cycle4(), &c).unwrap().n.powi(2);

        let m = amplitudes_for_setting(&cycle4(), &c, &MeasurementSetting::none()).unwrap();
        assert_eq!(m.support(1e-9).len(), 7);
        assert!((m.probability("0000") - n2 * b.powi(8)).abs() < 1e-12);
        assert!((m.probability("0000") - 0.2377).abs() < 1e-4);
        for v in vanished_states(&cycle4()) {
            assert!(m.probability(&v) < 1e-12, "{v}");
        }

        let m = amplitudes_for_setting(&cycle4(), &c, &MeasurementSetting::single(1)).unwrap();
        assert_eq!(m.support(1e-9).len(), 8);
        assert!((m.probability("1101") - n2 * a.powi(6) * b.powi(4)).abs() < 1e-12);
        assert!((m.probability("1101") - 0.0340).abs() < 5e-4);

        let m = amplitudes_for_setting(&cycle4(), &c, &MeasurementSetting::all(4)).unwrap();
        assert_eq!(m.support(1e-9).len(), 16);
        assert!((m.probability("1111") - n2 * (a * b).powi(8)).abs() < 1e-12);
        assert!((m.probability("1111") - 0.0050).abs() < 1e-4);

        for setting in MeasurementSetting::standard_family(4) {
            let m = amplitudes_for_setting(&cycle4(), &c, &setting).unwrap();
            let total: f64 = m.probabilities().values().sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn p_success_cycle4() {
        let c = BasisCoeffs::uniform(THETA, 4).unwrap();
        let (a, b) = (c.a()[0], c.b()[0]);
        let n2 = normalization_constant(&cycle4(), &c).unwrap().n.powi(2);
        let closed = n2 * (4.0 * a.powi(4) * b.powi(12) + 4.0 * a.powi(6) * b.powi(10) + (a * b).powi(8));
        let p = p_success_analytic(&cycle4(), &c, &interest_states_rule(&cycle4())).unwrap();
        assert!((p - closed).abs() < 1e-12);
        assert!((p - 0.0902).abs() < 1e-4);

        let zero = BasisCoeffs::uniform(0.0, 4).unwrap();
        assert_eq!(p_success_analytic(&cycle4(), &zero, &interest_states_rule(&cycle4())).unwrap(), 0.0);
    }

    #[test]
    fn coarse_sweep_endpoints() {
        let interest = interest_states_rule(&cycle4());
        let r = sweep_theta(&cycle4(), &interest, 0.0, PI, PI / 18.0).unwrap();
        assert_eq!(r.grid.len(), 19);
        assert_eq!(r.grid[0].p_success, 0.0);
        let last = r.grid.last().unwrap();
        assert!(last.degenerate && last.p_success == 0.0);
        assert!((last.theta - PI).abs() < 1e-12);
        assert!(sweep_theta(&cycle4(), &interest, 0.0, 0.0, 0.1).is_err());
        assert!(sweep_theta(&cycle4(), &interest, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let interest = interest_states_rule(&cycle4());
        let r = sweep_theta(&cycle4(), &interest, 0.0, PI, PI / 2.0).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "theta_rad,theta_pi_units,p_success");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("1.5707963268,0.5000000000,"));
    }
}
