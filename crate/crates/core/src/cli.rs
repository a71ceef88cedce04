//! Command-line front end: state files, commands and result records.
//!
//! Every command produces a [`Report`]: a [`ResultRecord`] (printed with
//! `--json`) plus its text rendering. Exit codes are 0 for success, 2 for an
//! infinite divergence and 1 for errors, invalid states and failed checks.

use std::f64::consts::LN_2;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::entropy::{self, Divergence, DivergenceResult, ModeTerm, RenyiTerms};
use crate::error::{Error, Result};
use crate::fock::{self, OracleState, EIG_FLOOR};
use crate::linalg::{max_abs, symplectic_residual, uncertainty_min_eigenvalue, RealMatrix, DEFAULT_TOL};
use crate::state::{GaussianState, InverseTemperature};

/// Default oracle truncation for one-mode inputs.
pub const DEFAULT_TRUNCATION_1: usize = 60;
/// Default oracle truncation for two-mode inputs (`d^2` basis states).
pub const DEFAULT_TRUNCATION_2: usize = 20;
/// Largest refined oracle basis (`(2d)^modes`) `verify` will build.
pub const MAX_ORACLE_BASIS: usize = 4096;

/// On-disk description of a Gaussian state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub modes: usize,
    /// Annihilation mean, one `[re, im]` pair per mode.
    pub mean: Vec<[f64; 2]>,
    /// `2n x 2n`, rows first, `x` block before `y` block.
    pub covariance: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl StateFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::StateFile(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn from_state(state: &GaussianState, label: Option<String>) -> Self {
        let c = state.covariance();
        Self {
            modes: state.modes(),
            mean: state.mean().iter().map(|z| [z.re, z.im]).collect(),
            covariance: (0..c.nrows()).map(|r| c.row(r).iter().cloned().collect()).collect(),
            label,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state files always serialize")
    }

    pub fn mean_vector(&self) -> Result<Vec<Complex64>> {
        if self.modes == 0 {
            return Err(Error::ZeroModes);
        }
        if self.mean.len() != self.modes {
            return Err(Error::StateFile(format!("`mean` has {} entries for {} modes", self.mean.len(), self.modes)));
        }
        Ok(self.mean.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
    }

    /// The covariance as a matrix, checking only its shape.
    pub fn covariance_matrix(&self) -> Result<RealMatrix> {
        let dim = 2 * self.modes;
        if self.modes == 0 {
            return Err(Error::ZeroModes);
        }
        if self.covariance.len() != dim || self.covariance.iter().any(|row| row.len() != dim) {
            return Err(Error::StateFile(format!("`covariance` must be {dim}x{dim} for {} modes", self.modes)));
        }
        Ok(RealMatrix::from_fn(dim, dim, |r, c| self.covariance[r][c]))
    }

    pub fn to_state(&self) -> Result<GaussianState> {
        GaussianState::new(self.mean_vector()?, self.covariance_matrix()?)
    }
}

#[derive(Debug, Parser)]
#[command(name = "gaussent", version, about = "Entropies and divergences of Gaussian bosonic states")]
pub struct Cli {
    /// Print the result record as JSON.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Check the uncertainty relation C + iJ/2 >= 0.
    Validate { file: PathBuf },
    /// Symplectic spectrum and residuals of the Williamson decomposition.
    Williamson { file: PathBuf },
    /// Inverse temperatures s_k and displacement of the standard form.
    StandardForm { file: PathBuf },
    /// Von Neumann entropy.
    VnEntropy {
        file: PathBuf,
        #[arg(long)]
        bits: bool,
        /// Displace mode k by RE,IM first (repeat once per mode).
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        displace: Vec<Complex64>,
    },
    /// Relative entropy S(rho || sigma).
    RelEntropy {
        rho: PathBuf,
        sigma: PathBuf,
        #[arg(long)]
        bits: bool,
    },
    /// Petz–Rényi relative entropy for 0 < alpha < 1.
    PetzRenyi {
        rho: PathBuf,
        sigma: PathBuf,
        #[arg(long, conflicts_with = "sweep")]
        alpha: Option<f64>,
        /// Evenly spaced alphas `start:end:steps`, endpoints included.
        #[arg(long, value_parser = parse_sweep)]
        sweep: Option<Sweep>,
        #[arg(long)]
        bits: bool,
    },
    /// Compare closed forms with the truncated Fock-space oracle.
    Verify {
        rho: PathBuf,
        sigma: PathBuf,
        /// Per-mode Fock cutoff (default 60 for one mode, 20 for two).
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.3, 0.5, 0.9])]
        alpha_list: Vec<f64>,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.end - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.end } else { self.start + h * i as f64 }).collect()
    }
}

fn parse_complex(text: &str) -> std::result::Result<Complex64, String> {
    let (re, im) = text.split_once(',').ok_or_else(|| format!("expected RE,IM, found {text:?}"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok(Complex64::new(parse(re)?, parse(im)?))
}

fn parse_sweep(text: &str) -> std::result::Result<Sweep, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("expected start:end:steps, found {text:?}"));
    };
    let start = a.parse::<f64>().map_err(|e| format!("{a:?}: {e}"))?;
    let end = b.parse::<f64>().map_err(|e| format!("{b:?}: {e}"))?;
    let steps = n.parse::<usize>().map_err(|e| format!("{n:?}: {e}"))?;
    if steps == 0 {
        return Err("a sweep needs at least one step".into());
    }
    Ok(Sweep { start, end, steps })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub sha256: String,
}

/// Machine-readable result of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    /// Arguments as given, without the program name.
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Validate {
        valid: bool,
        /// Smallest eigenvalue of `C + iJ/2`, when the matrix is symmetric.
        min_eigenvalue: Option<f64>,
        diagnostic: Option<String>,
    },
    Williamson {
        nu: Vec<f64>,
        symplectic_residual: f64,
        reconstruction_residual: f64,
    },
    StandardForm {
        inverse_temperatures: Vec<InverseTemperature>,
        displacement: Vec<[f64; 2]>,
    },
    VnEntropy {
        displacement: Vec<[f64; 2]>,
        value: f64,
    },
    RelEntropy {
        value: Divergence,
        classical: Option<f64>,
        quantum: Option<f64>,
        per_mode: Vec<ModeTerm>,
        /// Pure mode of `sigma` that `rho` leaves, when the value is infinite.
        infinite_mode: Option<usize>,
    },
    PetzRenyi {
        rows: Vec<RenyiRow>,
        /// `S(rho || sigma)`, the alpha -> 1 limit.
        limit: Divergence,
    },
    Verify {
        truncation: Option<usize>,
        tol: f64,
        refused: Option<String>,
        checks: Vec<Check>,
        passed: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenyiRow {
    pub alpha: f64,
    pub value: f64,
    pub terms: RenyiTerms,
}

/// One closed-form vs oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub quantity: String,
    pub closed_form: Divergence,
    /// Oracle at the requested truncation.
    pub oracle: Divergence,
    /// Oracle at twice the truncation.
    pub refined: Divergence,
    pub difference: f64,
    pub truncation_gap: f64,
    pub passed: bool,
}

impl ResultRecord {
    pub fn exit_code(&self) -> i32 {
        match &self.outcome {
            Outcome::Validate { valid: false, .. } | Outcome::Verify { passed: false, .. } => 1,
            Outcome::RelEntropy { value: Divergence::Infinite, .. } => 2,
            _ => 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub record: ResultRecord,
    pub text: String,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        self.record.exit_code()
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            self.record.to_json()
        } else {
            self.text.clone()
        }
    }
}

struct Input {
    digest: InputDigest,
    file: StateFile,
}

fn read_input(path: &Path) -> Result<Input> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| Error::StateFile(e.to_string()))?;
    let file = StateFile::parse(&text)?;
    let digest = InputDigest {
        path: path.display().to_string(),
        label: file.label.clone(),
        sha256: format!("{:x}", Sha256::digest(&bytes)),
    };
    Ok(Input { digest, file })
}

fn name(input: &Input) -> String {
    match &input.digest.label {
        Some(label) => format!("{label} ({})", input.digest.path),
        None => input.digest.path.clone(),
    }
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn units(bits: bool) -> (&'static str, f64) {
    if bits {
        ("bits", 1.0 / LN_2)
    } else {
        ("nats", 1.0)
    }
}

fn fmt_list<T: std::fmt::Display>(items: &[T]) -> String {
    let inner: Vec<String> = items.iter().map(|v| v.to_string()).collect();
    format!("[{}]", inner.join(", "))
}

/// Run a parsed command. `echo` is stored verbatim in the record.
pub fn execute(command: &Command, echo: Vec<String>) -> Result<Report> {
    let mut text = String::new();
    let (inputs, units, outcome) = match command {
        Command::Validate { file } => {
            let input = read_input(file)?;
            let c = input.file.covariance_matrix()?;
            input.file.mean_vector()?;
            let min_eigenvalue = uncertainty_min_eigenvalue(&c, DEFAULT_TOL).ok();
            let diagnostic = input.file.to_state().err().map(|e| e.to_string());
            let valid = diagnostic.is_none();
            writeln!(text, "state: {}", name(&input)).ok();
            writeln!(text, "modes: {}", input.file.modes).ok();
            match &diagnostic {
                None => writeln!(text, "valid: yes"),
                Some(d) => writeln!(text, "valid: no ({d})"),
            }
            .ok();
            if let Some(v) = min_eigenvalue {
                writeln!(text, "min eigenvalue of C + iJ/2: {v:.6e}").ok();
            }
            (vec![input.digest], None, Outcome::Validate { valid, min_eigenvalue, diagnostic })
        }
        Command::Williamson { file } => {
            let input = read_input(file)?;
            let state = input.file.to_state()?;
            let w = state.williamson()?;
            let symplectic_residual = symplectic_residual(&w.symplectic)?;
            let reconstruction_residual = max_abs(&(w.reconstruct() - state.covariance()));
            writeln!(text, "state: {}", name(&input)).ok();
            writeln!(text, "nu: {}", fmt_list(&w.nu)).ok();
            writeln!(text, "symplectic residual: {symplectic_residual:.3e}").ok();
            writeln!(text, "reconstruction residual: {reconstruction_residual:.3e}").ok();
            (vec![input.digest], None, Outcome::Williamson { nu: w.nu, symplectic_residual, reconstruction_residual })
        }
        Command::StandardForm { file } => {
            let input = read_input(file)?;
            let sf = input.file.to_state()?.standard_form()?;
            let displacement: Vec<[f64; 2]> = sf.displacement.iter().cloned().map(pair).collect();
            writeln!(text, "state: {}", name(&input)).ok();
            writeln!(text, "s: {}", fmt_list(&sf.inverse_temperatures)).ok();
            writeln!(text, "displacement: {}", fmt_list(&sf.displacement)).ok();
            let outcome = Outcome::StandardForm { inverse_temperatures: sf.inverse_temperatures, displacement };
            (vec![input.digest], None, outcome)
        }
        Command::VnEntropy { file, bits, displace } => {
            let input = read_input(file)?;
            let mut state = input.file.to_state()?;
            if !displace.is_empty() {
                if displace.len() != state.modes() {
                    return Err(Error::InvalidArgument(format!(
                        "--displace given {} times for a {}-mode state",
                        displace.len(),
                        state.modes()
                    )));
                }
                state = state.displace(displace)?;
            }
            let (unit, scale) = units(*bits);
            let value = entropy::von_neumann_entropy(&state)? * scale;
            writeln!(text, "state: {}", name(&input)).ok();
            if !displace.is_empty() {
                writeln!(text, "displaced by: {}", fmt_list(displace)).ok();
            }
            writeln!(text, "S(rho) = {value} {unit}").ok();
            let displacement = displace.iter().cloned().map(pair).collect();
            (vec![input.digest], Some(unit.to_string()), Outcome::VnEntropy { displacement, value })
        }
        Command::RelEntropy { rho, sigma, bits } => {
            let (a, b) = (read_input(rho)?, read_input(sigma)?);
            let result = entropy::relative_entropy(&a.file.to_state()?, &b.file.to_state()?)?;
            let (unit, scale) = units(*bits);
            writeln!(text, "rho: {}", name(&a)).ok();
            writeln!(text, "sigma: {}", name(&b)).ok();
            let outcome = match &result {
                DivergenceResult::Infinite { mode } => {
                    writeln!(text, "S(rho || sigma) = inf").ok();
                    writeln!(text, "sigma is pure in mode {mode} of its standard form, where rho is not").ok();
                    Outcome::RelEntropy {
                        value: Divergence::Infinite,
                        classical: None,
                        quantum: None,
                        per_mode: Vec::new(),
                        infinite_mode: Some(*mode),
                    }
                }
                DivergenceResult::Finite(d) => {
                    let per_mode: Vec<ModeTerm> = d
                        .per_mode
                        .iter()
                        .map(|t| ModeTerm { classical: t.classical * scale, quantum: t.quantum * scale })
                        .collect();
                    let value = d.value * scale;
                    writeln!(text, "S(rho || sigma) = {value} {unit}").ok();
                    writeln!(text, "classical part: {}", d.classical_part * scale).ok();
                    writeln!(text, "quantum part:   {}", d.quantum_part * scale).ok();
                    writeln!(text, "{:>5}  {:>22}  {:>22}", "mode", "classical", "quantum").ok();
                    for (k, t) in per_mode.iter().enumerate() {
                        writeln!(text, "{k:>5}  {:>22.15e}  {:>22.15e}", t.classical, t.quantum).ok();
                    }
                    Outcome::RelEntropy {
                        value: Divergence::Finite(value),
                        classical: Some(d.classical_part * scale),
                        quantum: Some(d.quantum_part * scale),
                        per_mode,
                        infinite_mode: None,
                    }
                }
            };
            (vec![a.digest, b.digest], Some(unit.to_string()), outcome)
        }
        Command::PetzRenyi { rho, sigma, alpha, sweep, bits } => {
            let alphas = match (alpha, sweep) {
                (Some(a), None) => vec![*a],
                (None, Some(s)) => s.points(),
                _ => return Err(Error::InvalidArgument("give either --alpha or --sweep".into())),
            };
            let (a, b) = (read_input(rho)?, read_input(sigma)?);
            let (ra, sb) = (a.file.to_state()?, b.file.to_state()?);
            let (unit, scale) = units(*bits);
            let limit = entropy::relative_entropy(&ra, &sb)?.value().map(|v| v * scale);
            let mut rows = Vec::with_capacity(alphas.len());
            for &al in &alphas {
                let r = entropy::petz_renyi(&ra, &sb, al)?;
                let t = r.terms;
                rows.push(RenyiRow {
                    alpha: al,
                    value: r.value * scale,
                    terms: RenyiTerms {
                        r_i: t.r_i * scale,
                        r_ii: t.r_ii * scale,
                        r_iii: t.r_iii * scale,
                        r_iv: t.r_iv * scale,
                    },
                });
            }
            writeln!(text, "rho: {}", name(&a)).ok();
            writeln!(text, "sigma: {}", name(&b)).ok();
            writeln!(text, "units: {unit}").ok();
            writeln!(
                text,
                "{:>8}  {:>20}  {:>13}  {:>13}  {:>13}  {:>13}  {:>11}",
                "alpha", "S_alpha", "R_I", "R_II", "R_III", "R_IV", "|S_alpha-S|"
            )
            .ok();
            for row in &rows {
                let gap = match limit {
                    Divergence::Finite(s) => format!("{:.3e}", (row.value - s).abs()),
                    Divergence::Infinite => "inf".into(),
                };
                let t = &row.terms;
                writeln!(
                    text,
                    "{:>8.4}  {:>20.15}  {:>13.6e}  {:>13.6e}  {:>13.6e}  {:>13.6e}  {:>11}",
                    row.alpha, row.value, t.r_i, t.r_ii, t.r_iii, t.r_iv, gap
                )
                .ok();
            }
            writeln!(text, "S(rho || sigma) = {limit}").ok();
            (vec![a.digest, b.digest], Some(unit.to_string()), Outcome::PetzRenyi { rows, limit })
        }
        Command::Verify { rho, sigma, truncation, alpha_list, tol } => {
            let (a, b) = (read_input(rho)?, read_input(sigma)?);
            let (ra, sb) = (a.file.to_state()?, b.file.to_state()?);
            writeln!(text, "rho: {}", name(&a)).ok();
            writeln!(text, "sigma: {}", name(&b)).ok();
            let outcome = verify(&ra, &sb, *truncation, alpha_list, *tol, &mut text)?;
            (vec![a.digest, b.digest], Some("nats".to_string()), outcome)
        }
    };
    Ok(Report { record: ResultRecord { command: echo, inputs, units, outcome }, text })
}

fn agree(a: Divergence, b: Divergence, tol: f64) -> (bool, f64) {
    match (a, b) {
        (Divergence::Finite(x), Divergence::Finite(y)) => ((x - y).abs() <= tol, (x - y).abs()),
        (Divergence::Infinite, Divergence::Infinite) => (true, 0.0),
        _ => (false, f64::INFINITY),
    }
}

fn verify(
    rho: &GaussianState,
    sigma: &GaussianState,
    truncation: Option<usize>,
    alphas: &[f64],
    tol: f64,
    text: &mut String,
) -> Result<Outcome> {
    if rho.modes() != sigma.modes() {
        return Err(Error::DimensionMismatch { expected: sigma.modes(), found: rho.modes() });
    }
    for &al in alphas {
        if !(al > 0.0 && al < 1.0) {
            return Err(Error::InvalidAlpha(al));
        }
    }
    let refuse = |reason: String, text: &mut String| {
        writeln!(text, "refused: {reason}").ok();
        Outcome::Verify { truncation, tol, refused: Some(reason), checks: Vec::new(), passed: false }
    };
    let recipes = OracleState::from_gaussian(rho).and_then(|r| Ok((r, OracleState::from_gaussian(sigma)?)));
    let (rr, sr) = match recipes {
        Ok(pair) => pair,
        Err(Error::NotRepresentable(reason)) => return Ok(refuse(reason, text)),
        Err(e) => return Err(e),
    };
    let modes = rho.modes();
    let d = truncation.unwrap_or(if modes == 1 { DEFAULT_TRUNCATION_1 } else { DEFAULT_TRUNCATION_2 });
    let basis = (2 * d).checked_pow(modes as u32).unwrap_or(usize::MAX);
    if basis > MAX_ORACLE_BASIS {
        let reason = format!("a refined basis of {basis} states exceeds the limit of {MAX_ORACLE_BASIS}; lower --truncation");
        return Ok(refuse(reason, text));
    }
    let truncation = Some(d);

    let mut checks = Vec::new();
    let densities = |k: usize| -> Result<(fock::FockOperator, fock::FockOperator)> { Ok((rr.density(k)?, sr.density(k)?)) };
    let (lo, hi) = (densities(d)?, densities(2 * d)?);
    let pick = |k: usize| if k == d { &lo } else { &hi };

    let mut push = |quantity: String, closed_form: Divergence, g: fock::Gated| {
        let (ok, difference) = agree(closed_form, g.value, tol);
        let truncation_gap = g.gap();
        checks.push(Check {
            quantity,
            closed_form,
            oracle: g.value,
            refined: g.refined,
            difference,
            truncation_gap,
            passed: ok && g.converged(tol),
        });
    };

    let g = fock::gated(d, |k| Ok(Divergence::Finite(fock::oracle_von_neumann_entropy(&pick(k).0)?)))?;
    push("S(rho)".into(), Divergence::Finite(entropy::von_neumann_entropy(rho)?), g);
    let g = fock::gated(d, |k| fock::oracle_relative_entropy(&pick(k).0, &pick(k).1, EIG_FLOOR))?;
    push("S(rho || sigma)".into(), entropy::relative_entropy(rho, sigma)?.value(), g);
    for &al in alphas {
        let g = fock::gated(d, |k| fock::oracle_petz_renyi(&pick(k).0, &pick(k).1, al))?;
        push(format!("S_{al}(rho || sigma)"), Divergence::Finite(entropy::petz_renyi(rho, sigma, al)?.value), g);
    }

    let passed = checks.iter().all(|c| c.passed);
    writeln!(text, "truncation: {d} per mode (gate against {})", 2 * d).ok();
    writeln!(text, "tolerance: {tol:e}").ok();
    writeln!(text, "{:<22}  {:>20}  {:>20}  {:>10}  {:>10}  verdict", "quantity", "closed form", "oracle", "|diff|", "d vs 2d")
        .ok();
    for c in &checks {
        writeln!(
            text,
            "{:<22}  {:>20}  {:>20}  {:>10.3e}  {:>10.3e}  {}",
            c.quantity,
            format!("{:.12}", c.closed_form.as_f64() + 0.0),
            format!("{:.12}", c.oracle.as_f64() + 0.0),
            c.difference,
            c.truncation_gap,
            if c.passed { "pass" } else { "FAIL" }
        )
        .ok();
    }
    writeln!(text, "overall: {}", if passed { "pass" } else { "FAIL" }).ok();
    Ok(Outcome::Verify { truncation, tol, refused: None, checks, passed })
}
