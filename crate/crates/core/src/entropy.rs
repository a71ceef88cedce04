//! Entropies and divergences of Gaussian states, in nats.
//!
//! Both divergences first move to the frame in which `sigma` is a product of
//! thermal modes: with `sigma`'s standard form `(ell, L, t)`, `rho` is displaced
//! by `-ell` and conjugated by `L^{-1}`, giving `rho' = rho(m_rho, C')`. The mode
//! marginals `(m_k, T_k)` of `rho'` and its thermal spectrum `s` then determine
//!
//! ```text
//! S(rho || sigma) = sum_k  H(e^-s_k : e^-t_k) / (1 - e^-s_k)                 (classical)
//!                        + (t_k / 2) [Tr T_k - coth(s_k / 2) + 2 |m_k|^2]      (quantum)
//! ```
//!
//! unless some `t_k = inf` has a non-vacuum marginal, in which case the value is `+inf`.

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{doubled_diagonal, RealMatrix};
use crate::state::{GaussianState, InverseTemperature, ModeMarginal, StandardForm};

/// Marginals within this distance of the vacuum count as vacuum in the
/// infinite-divergence test.
pub const VACUUM_TOL: f64 = 1e-9;

/// A divergence value: finite nats or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Divergence {
    Finite(f64),
    Infinite,
}

impl Divergence {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Self::Finite(v) => Some(v),
            Self::Infinite => None,
        }
    }

    pub fn as_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Self {
        match self {
            Self::Finite(v) => Self::Finite(f(v)),
            Self::Infinite => Self::Infinite,
        }
    }
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Divergence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => serializer.serialize_f64(*v),
            Self::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Divergence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Token(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(v) => Ok(Self::Finite(v)),
            Repr::Token(t) if t == "inf" => Ok(Self::Infinite),
            Repr::Token(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", found {t:?}"))),
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// Binary Shannon entropy `-p ln p - (1 - p) ln(1 - p)`.
pub fn shannon_h(p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(-xlogx(p) - xlogx(1.0 - p))
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `a ln(a / b)` with `0 ln(0 / b) = 0`; `None` when `a > 0 = b`.
fn relative_term(a: f64, b: f64) -> Option<f64> {
    if a == 0.0 {
        Some(0.0)
    } else if b == 0.0 {
        None
    } else {
        Some(a * (a / b).ln())
    }
}

/// Relative entropy of the Bernoulli trial `p1` with respect to `p2`.
pub fn shannon_relative(p1: f64, p2: f64) -> Result<Divergence> {
    check_probability(p1)?;
    check_probability(p2)?;
    Ok(binary_relative(p1, 1.0 - p1, p2, 1.0 - p2))
}

/// Same as [`shannon_relative`] with the failure probabilities passed separately
/// so they can be computed without cancellation.
fn binary_relative(p1: f64, q1: f64, p2: f64, q2: f64) -> Divergence {
    match (relative_term(p1, p2), relative_term(q1, q2)) {
        (Some(a), Some(b)) => Divergence::Finite(a + b),
        _ => Divergence::Infinite,
    }
}

/// Entropy of the thermal state `rho(s)`: `H(e^-s) / (1 - e^-s)`, zero for the vacuum.
pub fn thermal_entropy(s: InverseTemperature) -> f64 {
    match s {
        InverseTemperature::Infinite => 0.0,
        InverseTemperature::Finite(_) => {
            let h = shannon_h(s.success_probability()).expect("e^-s is a probability");
            h / s.failure_probability()
        }
    }
}

/// Von Neumann entropy from the thermal spectrum of the standard form.
pub fn von_neumann_entropy(rho: &GaussianState) -> Result<f64> {
    Ok(rho.standard_form()?.inverse_temperatures.into_iter().map(thermal_entropy).sum())
}

/// `Tr rho(m, T) ln rho(t) = ln(1 - e^-t) - (t/2)(Tr T + 2|m|^2 - 1)` for finite `t`.
pub fn cross_term_1mode(mm: &ModeMarginal, t: InverseTemperature) -> Result<f64> {
    match t {
        InverseTemperature::Infinite => Err(Error::InvalidInverseTemperature(f64::INFINITY)),
        InverseTemperature::Finite(tv) => {
            Ok(t.ln_failure_probability() - 0.5 * tv * (mm.trace_cov() + 2.0 * mm.mean.norm_sqr() - 1.0))
        }
    }
}

/// Classical and quantum contribution of one mode pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeTerm {
    pub classical: f64,
    pub quantum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub value: f64,
    pub classical_part: f64,
    pub quantum_part: f64,
    pub per_mode: Vec<ModeTerm>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DivergenceResult {
    Finite(Decomposition),
    /// `sigma` has a pure mode (zero-based index in its standard form) on which
    /// the transformed `rho` is not the vacuum.
    Infinite { mode: usize },
}

impl DivergenceResult {
    pub fn value(&self) -> Divergence {
        match self {
            Self::Finite(d) => Divergence::Finite(d.value),
            Self::Infinite { .. } => Divergence::Infinite,
        }
    }

    pub fn decomposition(&self) -> Option<&Decomposition> {
        match self {
            Self::Finite(d) => Some(d),
            Self::Infinite { .. } => None,
        }
    }
}

/// `rho` seen from the frame in which `sigma` is a product of thermal modes.
#[derive(Debug, Clone)]
pub struct DisentangledPair {
    /// `rho' = (W(ell) Γ)^{-1} rho (W(ell) Γ)`.
    pub rho: GaussianState,
    /// Standard form of `rho'`; its displacement is `m_rho`.
    pub rho_form: StandardForm,
    /// Thermal spectrum `t` of `sigma`, ascending.
    pub sigma_temperatures: Vec<InverseTemperature>,
    /// Mode marginals `(m_k, T_k)` of `rho'`.
    pub marginals: Vec<ModeMarginal>,
}

impl DisentangledPair {
    pub fn new(rho: &GaussianState, sigma: &GaussianState) -> Result<Self> {
        if rho.modes() != sigma.modes() {
            return Err(Error::DimensionMismatch { expected: sigma.modes(), found: rho.modes() });
        }
        let sigma_form = sigma.standard_form()?;
        let back: Vec<_> = sigma_form.displacement.iter().map(|z| -z).collect();
        let rho = rho.displace(&back)?.conjugate_symplectic(&sigma_form.disentangler())?;
        let rho_form = rho.standard_form()?;
        let marginals = rho.marginals();
        Ok(Self { rho, rho_form, sigma_temperatures: sigma_form.inverse_temperatures, marginals })
    }

    pub fn rho_temperatures(&self) -> &[InverseTemperature] {
        &self.rho_form.inverse_temperatures
    }

    /// First pure mode of `sigma` on which `rho'` is not the vacuum.
    pub fn support_violation(&self) -> Option<usize> {
        self.sigma_temperatures
            .iter()
            .zip(&self.marginals)
            .position(|(t, mm)| t.is_infinite() && !mm.is_vacuum(VACUUM_TOL))
    }
}

/// Relative entropy `Tr rho (ln rho - ln sigma)` with its classical/quantum split.
///
/// Modes where `sigma` is pure (and `rho'` is vacuum there) contribute only
/// `-S(rho(s_k))` to the classical part.
pub fn relative_entropy(rho: &GaussianState, sigma: &GaussianState) -> Result<DivergenceResult> {
    let pair = DisentangledPair::new(rho, sigma)?;
    if let Some(mode) = pair.support_violation() {
        return Ok(DivergenceResult::Infinite { mode });
    }
    let per_mode: Vec<ModeTerm> = pair
        .rho_temperatures()
        .iter()
        .zip(&pair.sigma_temperatures)
        .zip(&pair.marginals)
        .map(|((&s, &t), mm)| mode_term(s, t, mm))
        .collect();
    let classical_part: f64 = per_mode.iter().map(|m| m.classical).sum();
    let quantum_part: f64 = per_mode.iter().map(|m| m.quantum).sum();
    let value = classical_part + quantum_part;
    if !value.is_finite() {
        return Err(Error::NumericalFailure(format!("relative entropy evaluated to {value}")));
    }
    Ok(DivergenceResult::Finite(Decomposition { value, classical_part, quantum_part, per_mode }))
}

fn mode_term(s: InverseTemperature, t: InverseTemperature, mm: &ModeMarginal) -> ModeTerm {
    match t {
        InverseTemperature::Infinite => ModeTerm { classical: -thermal_entropy(s), quantum: 0.0 },
        InverseTemperature::Finite(tv) => {
            let h = binary_relative(
                s.success_probability(),
                s.failure_probability(),
                t.success_probability(),
                t.failure_probability(),
            );
            let classical = h.finite().expect("0 < e^-t < 1 keeps the Bernoulli divergence finite")
                / s.failure_probability();
            let coth = 2.0 * s.symplectic_eigenvalue();
            let quantum = 0.5 * tv * (mm.trace_cov() - coth + 2.0 * mm.mean.norm_sqr());
            ModeTerm { classical, quantum }
        }
    }
}

/// The same divergence through the ungrouped sum
/// `-S(rho) - sum_{k: t_k < inf} Tr rho(m_k, T_k) ln rho(t_k)`.
pub fn relative_entropy_ungrouped(rho: &GaussianState, sigma: &GaussianState) -> Result<Divergence> {
    let pair = DisentangledPair::new(rho, sigma)?;
    if pair.support_violation().is_some() {
        return Ok(Divergence::Infinite);
    }
    let entropy: f64 = pair.rho_temperatures().iter().map(|&s| thermal_entropy(s)).sum();
    let mut value = -entropy;
    for (&t, mm) in pair.sigma_temperatures.iter().zip(&pair.marginals) {
        if !t.is_infinite() {
            value -= cross_term_1mode(mm, t)?;
        }
    }
    Ok(Divergence::Finite(value))
}

/// `(-Im m, Re m)`, the vector paired with the Gaussian integration variable.
#[derive(Debug, Clone, PartialEq)]
pub struct MTilde(pub DVector<f64>);

impl MTilde {
    pub fn from_mean(mean: &[num_complex::Complex64]) -> Self {
        let n = mean.len();
        Self(DVector::from_fn(2 * n, |r, _| if r < n { -mean[r].im } else { mean[r - n].re }))
    }
}

/// The four terms of the Petz–Rényi divergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenyiTerms {
    pub r_i: f64,
    pub r_ii: f64,
    pub r_iii: f64,
    pub r_iv: f64,
}

impl RenyiTerms {
    pub fn sum(&self) -> f64 {
        self.r_i + self.r_ii + self.r_iii + self.r_iv
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PetzRenyiResult {
    pub alpha: f64,
    pub value: f64,
    pub terms: RenyiTerms,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// Ingredients of `Tr rho^alpha sigma^(1-alpha)` in the disentangled frame.
struct Overlap {
    s: Vec<InverseTemperature>,
    t: Vec<InverseTemperature>,
    /// `L_rho^T D(alpha s) L_rho + D((1 - alpha) t)`.
    kernel: RealMatrix,
    m_tilde: MTilde,
}

impl Overlap {
    fn new(rho: &GaussianState, sigma: &GaussianState, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let pair = DisentangledPair::new(rho, sigma)?;
        let s = pair.rho_form.inverse_temperatures.clone();
        let t = pair.sigma_temperatures;
        let nu_a: Vec<f64> = s.iter().map(|s| s.scaled(alpha).symplectic_eigenvalue()).collect();
        let nu_b: Vec<f64> = t.iter().map(|t| t.scaled(1.0 - alpha).symplectic_eigenvalue()).collect();
        let l = &pair.rho_form.symplectic;
        let kernel = l.transpose() * doubled_diagonal(&nu_a) * l + doubled_diagonal(&nu_b);
        let kernel = (&kernel + kernel.transpose()) * 0.5;
        let m_tilde = MTilde::from_mean(pair.rho.mean());
        Ok(Self { s, t, kernel, m_tilde })
    }
}

/// Petz–Rényi relative entropy `ln Tr(rho^alpha sigma^(1-alpha)) / (alpha - 1)`
/// for `0 < alpha < 1`, as the sum of four closed-form terms.
pub fn petz_renyi(rho: &GaussianState, sigma: &GaussianState, alpha: f64) -> Result<PetzRenyiResult> {
    let ov = Overlap::new(rho, sigma, alpha)?;
    let beta = 1.0 - alpha;
    let chol = ov
        .kernel
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("Gaussian overlap kernel is not positive definite".into()))?;
    let solved = chol.solve(&ov.m_tilde.0);
    let quad = ov.m_tilde.0.dot(&solved);
    let ln_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();

    let r_i = -ov
        .s
        .iter()
        .map(|s| alpha * s.ln_failure_probability() - s.scaled(alpha).ln_failure_probability())
        .sum::<f64>()
        / beta;
    let r_ii = ov
        .t
        .iter()
        .map(|t| -t.ln_failure_probability() + t.scaled(beta).ln_failure_probability() / beta)
        .sum::<f64>();
    let r_iii = quad / beta;
    let r_iv = ln_det / (2.0 * beta);
    let terms = RenyiTerms { r_i, r_ii, r_iii, r_iv };
    let value = terms.sum();
    if !value.is_finite() {
        return Err(Error::NumericalFailure(format!("Petz-Renyi divergence evaluated to {value}")));
    }
    Ok(PetzRenyiResult { alpha, value, terms })
}

/// `Tr rho^alpha sigma^(1-alpha)` from the Gaussian integral, using products of
/// the normalisation factors and an LU solve.
pub fn trace_power_overlap(rho: &GaussianState, sigma: &GaussianState, alpha: f64) -> Result<f64> {
    let ov = Overlap::new(rho, sigma, alpha)?;
    let beta = 1.0 - alpha;
    let p = |r: &[InverseTemperature], scale: f64| -> f64 {
        r.iter().map(|x| x.scaled(scale).failure_probability()).product()
    };
    let prefactor = p(&ov.s, 1.0).powf(alpha) / p(&ov.s, alpha) * p(&ov.t, 1.0).powf(beta) / p(&ov.t, beta);
    let lu = ov.kernel.clone().lu();
    let det = lu.determinant();
    let solved = lu
        .solve(&ov.m_tilde.0)
        .ok_or_else(|| Error::NumericalFailure("Gaussian overlap kernel is singular".into()))?;
    if det <= 0.0 {
        return Err(Error::NumericalFailure(format!("Gaussian overlap kernel has determinant {det:e}")));
    }
    let quad = ov.m_tilde.0.dot(&solved);
    Ok(prefactor * (-quad).exp() / det.sqrt())
}
