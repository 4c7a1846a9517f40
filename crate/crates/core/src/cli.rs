//! `hardy` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input, 3 post-selection impossible,
//! 4 enumeration or register size cap exceeded.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytic::{
    amplitudes_for_setting, normalization_constant, sweep_theta, sweep_theta_fine, BasisCoeffs,
    SweepPoint, SweepResult, FINE_GRID_POINTS,
};
use crate::bits::to_bitstring;
use crate::config::{build_circuit, interest_states_rule, vanished_states, EntanglerSpec, MeasurementSetting};
use crate::error::{Error, Result};
use crate::lhv::{paradox_states_oracle, verify_paradox};
use crate::noise::{diagnostic_suite, NoiseModel};
use crate::sv::{postselect_ancillas, probabilities, run_circuit, sample_histogram, Histogram};

pub const DEFAULT_SHOTS: u64 = 2048 * 200;
pub const DEFAULT_THETA: &str = "0.423pi";

#[derive(Debug, Parser)]
#[command(name = "hardy", version, about = "Hardy-type nonlocality on configurable entanglement graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every particle measured in {u,v}; vanished outcomes must read zero.
    Set1(RunConfig),
    /// One particle reversed into {c,d}; exposes partner correlations.
    Set2 {
        /// 1-based particle to reverse.
        #[arg(long)]
        particle: usize,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Every particle in {c,d}; reports P_success over the rule states.
    Set3(RunConfig),
    /// P_success as a function of theta, written as CSV.
    Sweep {
        #[command(flatten)]
        config: RunConfig,
        #[arg(long, default_value = "0")]
        start: String,
        #[arg(long, default_value = "pi")]
        end: String,
        #[arg(long, default_value = "pi/18")]
        step: String,
        #[arg(long, value_enum, default_value_t = SweepMode::Analytic)]
        mode: SweepMode,
        /// Use a 10^4-point grid with parabolic refinement (analytic mode).
        #[arg(long)]
        fine: bool,
    },
    /// Exhaustive local-hidden-variable certificate.
    Lhv(RunConfig),
    /// Side-by-side comparison of two configurations.
    Compare {
        #[arg(long = "spec-a")]
        spec_a: String,
        #[arg(long = "spec-b")]
        spec_b: String,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Noisy diagnostic circuit suite.
    Diagnose {
        #[arg(long, default_value_t = 0.01)]
        p1: f64,
        #[arg(long = "p-mc", default_value_t = 0.02)]
        p_mc: f64,
        #[arg(long = "p-ro", default_value_t = 0.005)]
        p_ro: f64,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Analytic,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Builtin name (cycleN, completeN) or path to a JSON spec file.
    #[arg(long, default_value = "cycle4")]
    pub spec: String,
    /// Angle in radians, or in pi units such as `0.423pi` or `pi/18`.
    #[arg(long, default_value = DEFAULT_THETA)]
    pub theta: String,
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    pub shots: u64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    fn resolve_spec(&self) -> Result<EntanglerSpec> {
        resolve_spec(&self.spec)
    }

    fn theta(&self) -> Result<f64> {
        let t = parse_angle(&self.theta)?;
        if !(0.0..=PI + 1e-12).contains(&t) {
            return Err(Error::ThetaOutOfRange(t));
        }
        Ok(t.min(PI))
    }

    fn shots(&self) -> Result<u64> {
        if self.shots == 0 {
            return Err(Error::InvalidInput("shots must be at least 1".into()));
        }
        Ok(self.shots)
    }
}

/// Builtin names take precedence; anything else is read as a JSON file.
pub fn resolve_spec(source: &str) -> Result<EntanglerSpec> {
    let builtin = ["cycle", "complete"].iter().any(|p| {
        source
            .strip_prefix(p)
            .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
    });
    if builtin {
        EntanglerSpec::from_name(source)
    } else {
        EntanglerSpec::from_path(source)
    }
}

/// Parses `1.2`, `pi`, `0.423pi`, `0.423*pi`, `pi/18`, `2pi/9`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.trim().to_ascii_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::InvalidInput(format!("cannot parse angle {text:?}"));
    let number = |t: &str| t.parse::<f64>().map_err(|_| bad());
    if let Some(pos) = s.find("pi") {
        let (head, tail) = (&s[..pos], &s[pos + 2..]);
        let factor = match head.trim_end_matches('*') {
            "" => 1.0,
            h => number(h)?,
        };
        let divisor = match tail {
            "" => 1.0,
            t => number(t.strip_prefix('/').ok_or_else(bad)?)?,
        };
        if divisor == 0.0 {
            return Err(bad());
        }
        Ok(factor * PI / divisor)
    } else {
        number(&s)
    }
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::PostSelectionImpossible { .. } | Error::DegeneratePostSelection { .. } => 3,
        Error::EnumerationCap { .. } | Error::TooManyQubits { .. } => 4,
        _ => 2,
    }
}

/// Report emitted by `set1`, `set2` and `set3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetReport {
    pub setting: String,
    pub theta: f64,
    pub shots: u64,
    pub seed: u64,
    pub post_selection_rate: f64,
    pub counts: BTreeMap<String, u64>,
    pub analytic: BTreeMap<String, f64>,
    pub p_success: Option<f64>,
    pub notes: Vec<String>,
}

impl SetReport {
    fn render(&self, format: Format) -> Result<String> {
        Ok(match format {
            Format::Json => serde_json::to_string_pretty(self)? + "\n",
            Format::Csv => {
                let mut out = String::from("outcome,count,frequency,analytic\n");
                for (k, c) in &self.counts {
                    let _ = writeln!(out, "{k},{c},{:.6},{:.6}", *c as f64 / self.shots as f64, self.analytic[k]);
                }
                out
            }
            Format::Table => {
                let mut out = format!(
                    "{}  theta={:.4}pi  shots={}  seed={}  post_selection_rate={:.6}\n",
                    self.setting,
                    self.theta / PI,
                    self.shots,
                    self.seed,
                    self.post_selection_rate
                );
                let _ = writeln!(out, "{:<10} {:>10} {:>10} {:>10}", "outcome", "count", "sampled%", "analytic%");
                for (k, c) in &self.counts {
                    let _ = writeln!(
                        out,
                        "{:<10} {:>10} {:>10.3} {:>10.3}",
                        k,
                        c,
                        100.0 * *c as f64 / self.shots as f64,
                        100.0 * self.analytic[k]
                    );
                }
                if let Some(p) = self.p_success {
                    let _ = writeln!(out, "p_success = {:.4}%", 100.0 * p);
                }
                for n in &self.notes {
                    let _ = writeln!(out, "note: {n}");
                }
                out
            }
        })
    }
}

/// Runs one condition set: circuit, post-selection, sampling, and the
/// closed-form probabilities for the same setting.
pub fn run_setting(
    spec: &EntanglerSpec,
    theta: f64,
    setting: &MeasurementSetting,
    shots: u64,
    seed: u64,
) -> Result<(SetReport, Histogram)> {
    let n = spec.n();
    let circuit = build_circuit(spec, theta, setting)?;
    let state = run_circuit(&circuit)?;
    let (data, rate) = postselect_ancillas(&state, &circuit.ancillas(), false)?;
    let exact = probabilities(&data);
    let mut hist = sample_histogram(&exact, shots, seed)?;
    hist.post_selection_rate = rate;

    let coeffs = BasisCoeffs::uniform(theta, n)?;
    let analytic = amplitudes_for_setting(spec, &coeffs, setting)?.probabilities();
    let norm = normalization_constant(spec, &coeffs)?;

    let counts = (0..1usize << n)
        .map(|i| {
            let k = to_bitstring(i, n);
            let c = hist.count(&k);
            (k, c)
        })
        .collect();

    let mut notes = vec![format!(
        "post-selection keeps {:.6} of shots; closed form 1 + C = {:.6}",
        rate,
        norm.branch_weight()
    )];
    let p_success = if setting.reversed().len() == n {
        let interest = interest_states_rule(spec);
        let sampled: f64 = interest.iter().map(|s| hist.frequency(s)).sum();
        let exact_p: f64 = interest.iter().map(|s| analytic[s]).sum();
        notes.push(format!(
            "p_success over {} rule states: sampled {:.4}, exact closed form {:.6}",
            interest.len(),
            sampled,
            exact_p
        ));
        Some(sampled)
    } else {
        None
    };
    if setting.reversed().is_empty() {
        let vanished = vanished_states(spec);
        let seen: u64 = vanished.iter().map(|v| hist.count(v)).sum();
        notes.push(format!("{} vanished outcomes, {} sampled counts on them", vanished.len(), seen));
    }
    if let [k] = setting.reversed().iter().copied().collect::<Vec<_>>()[..] {
        if n > 1 {
            let interest: Vec<String> = analytic
                .iter()
                .filter(|(s, p)| **p > 1e-9 && s.as_bytes()[k - 1] == b'1')
                .map(|(s, _)| s.clone())
                .collect();
            notes.push(format!("outcomes with D{k}=1: {}", interest.join(", ")));
        }
    }

    Ok((
        SetReport {
            setting: setting.label(n),
            theta,
            shots,
            seed,
            post_selection_rate: rate,
            counts,
            analytic,
            p_success,
            notes,
        },
        hist,
    ))
}

/// Sampled counterpart of [`sweep_theta`]: each grid angle runs the
/// all-reversed circuit with seed `seed + index`.
pub fn sampled_sweep(
    spec: &EntanglerSpec,
    interest: &BTreeSet<String>,
    start: f64,
    end: f64,
    step: f64,
    shots: u64,
    seed: u64,
) -> Result<SweepResult> {
    let template = sweep_theta(spec, interest, start, end, step)?;
    let all = MeasurementSetting::all(spec.n());
    let grid = template
        .grid
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if p.degenerate {
                return Ok(*p);
            }
            let (_, hist) = run_setting(spec, p.theta, &all, shots, seed.wrapping_add(i as u64))?;
            Ok(SweepPoint {
                theta: p.theta,
                p_success: interest.iter().map(|s| hist.frequency(s)).sum(),
                degenerate: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = grid
        .iter()
        .copied()
        .fold(grid[0], |b, p| if p.p_success > b.p_success { p } else { b });
    Ok(SweepResult {
        grid,
        argmax_theta: best.theta,
        max_p: best.p_success,
        refined: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareColumn {
    pub spec: EntanglerSpec,
    pub vanished: usize,
    pub paradox_states: usize,
    pub max_p_success: f64,
    pub argmax_theta: f64,
}

pub fn compare_column(spec: &EntanglerSpec, theta: f64) -> Result<CompareColumn> {
    let paradox = paradox_states_oracle(spec, theta)?;
    let sweep = sweep_theta_fine(spec, &paradox, 0.0, PI, FINE_GRID_POINTS)?;
    let (argmax_theta, max_p_success) = sweep.best();
    Ok(CompareColumn {
        spec: spec.clone(),
        vanished: vanished_states(spec).len(),
        paradox_states: paradox.len(),
        max_p_success,
        argmax_theta,
    })
}

fn render_compare(a: &CompareColumn, b: &CompareColumn, names: (&str, &str)) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<22} {:>16} {:>16}", "", names.0, names.1);
    let _ = writeln!(out, "{:<22} {:>16} {:>16}", "vanished states", a.vanished, b.vanished);
    let _ = writeln!(out, "{:<22} {:>16} {:>16}", "paradox states", a.paradox_states, b.paradox_states);
    let _ = writeln!(
        out,
        "{:<22} {:>15.4}% {:>15.4}%",
        "max p_success",
        100.0 * a.max_p_success,
        100.0 * b.max_p_success
    );
    let _ = writeln!(
        out,
        "{:<22} {:>14.4}pi {:>14.4}pi",
        "argmax theta",
        a.argmax_theta / PI,
        b.argmax_theta / PI
    );
    out
}

/// Output of one command: primary text plus an optional summary line meant
/// for stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub body: String,
    pub summary: Option<String>,
    pub output: Option<PathBuf>,
}

pub fn execute(command: &Command) -> Result<Rendered> {
    let plain = |body: String, output: &Option<PathBuf>| Rendered {
        body,
        summary: None,
        output: output.clone(),
    };
    match command {
        Command::Set1(cfg) => set_command(cfg, MeasurementSetting::none()),
        Command::Set2 { particle, config } => {
            let spec = config.resolve_spec()?;
            if *particle == 0 || *particle > spec.n() {
                return Err(Error::InvalidInput(format!(
                    "particle {particle} is outside 1..={}",
                    spec.n()
                )));
            }
            set_command(config, MeasurementSetting::single(*particle))
        }
        Command::Set3(cfg) => {
            let spec = cfg.resolve_spec()?;
            set_command(cfg, MeasurementSetting::all(spec.n()))
        }
        Command::Sweep {
            config,
            start,
            end,
            step,
            mode,
            fine,
        } => {
            let spec = config.resolve_spec()?;
            let interest = interest_states_rule(&spec);
            let (start, end, step) = (parse_angle(start)?, parse_angle(end)?, parse_angle(step)?);
            let result = match (mode, fine) {
                (SweepMode::Analytic, false) => sweep_theta(&spec, &interest, start, end, step)?,
                (SweepMode::Analytic, true) => sweep_theta_fine(&spec, &interest, start, end, FINE_GRID_POINTS)?,
                (SweepMode::Sampled, _) => {
                    sampled_sweep(&spec, &interest, start, end, step, config.shots()?, config.seed)?
                }
            };
            let mut buf = Vec::new();
            result.write_csv(&mut buf)?;
            let (t, p) = result.best();
            Ok(Rendered {
                body: String::from_utf8(buf).expect("csv is utf-8"),
                summary: Some(format!("argmax theta = {:.5}pi ({:.6} rad), max p_success = {:.6}", t / PI, t, p)),
                output: config.output.clone(),
            })
        }
        Command::Lhv(cfg) => {
            let report = verify_paradox(&cfg.resolve_spec()?, cfg.theta()?)?;
            Ok(plain(report.to_json()? + "\n", &cfg.output))
        }
        Command::Compare { spec_a, spec_b, config } => {
            let (a, b) = (resolve_spec(spec_a)?, resolve_spec(spec_b)?);
            if a.n() != b.n() {
                return Err(Error::InvalidInput(format!(
                    "configurations have different particle counts ({} vs {})",
                    a.n(),
                    b.n()
                )));
            }
            let theta = config.theta()?;
            let (ca, cb) = (compare_column(&a, theta)?, compare_column(&b, theta)?);
            let body = match config.format {
                Format::Json => serde_json::to_string_pretty(&[&ca, &cb])? + "\n",
                Format::Csv => {
                    let mut out = String::from("spec,vanished,paradox_states,max_p_success,argmax_theta\n");
                    for (name, c) in [(spec_a, &ca), (spec_b, &cb)] {
                        let _ = writeln!(
                            out,
                            "{name},{},{},{:.8},{:.8}",
                            c.vanished, c.paradox_states, c.max_p_success, c.argmax_theta
                        );
                    }
                    out
                }
                Format::Table => render_compare(&ca, &cb, (spec_a, spec_b)),
            };
            Ok(plain(body, &config.output))
        }
        Command::Diagnose {
            p1,
            p_mc,
            p_ro,
            shots,
            seed,
            output,
        } => {
            let noise = NoiseModel::new(*p1, *p_mc, *p_ro)?;
            if *shots == 0 {
                return Err(Error::InvalidInput("shots must be at least 1".into()));
            }
            let report = diagnostic_suite(&noise, *shots, *seed)?;
            Ok(plain(serde_json::to_string_pretty(&report)? + "\n", output))
        }
    }
}

fn set_command(cfg: &RunConfig, setting: MeasurementSetting) -> Result<Rendered> {
    let spec = cfg.resolve_spec()?;
    let (report, _) = run_setting(&spec, cfg.theta()?, &setting, cfg.shots()?, cfg.seed)?;
    Ok(Rendered {
        body: report.render(cfg.format)?,
        summary: None,
        output: cfg.output.clone(),
    })
}

/// Parses arguments, runs the command and writes its output.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = execute(&cli.command).and_then(|r| {
        match &r.output {
            Some(path) => std::fs::write(path, &r.body)?,
            None => print!("{}", r.body),
        }
        if let Some(s) = &r.summary {
            eprintln!("{s}");
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
