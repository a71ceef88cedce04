//! Gaussian states described by their annihilation mean and covariance matrix.
//!
//! For `u = x + iy` the covariance is the quadratic form of the variance of
//! `p(u) = x·p - y·q`, so the upper-left block holds `Cov(p)`, the lower-right
//! block `Cov(q)` and the off-diagonal blocks `-Cov(p_j, q_k)`. The annihilation
//! mean is `m_k = <a_k> = (<q_k> + i <p_k>) / sqrt(2)`.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    self, complex_to_phase_space, doubled_diagonal, max_abs, mode_count, symplectic_complex_action,
    symplectic_inverse, RealMatrix, WilliamsonForm, DEFAULT_TOL,
};

/// Symplectic eigenvalues within this distance of 1/2 are treated as pure modes.
pub const PURE_MODE_TOL: f64 = 1e-10;

/// Inverse temperature of a thermal mode; `Infinite` is the vacuum.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum InverseTemperature {
    Finite(f64),
    Infinite,
}

impl InverseTemperature {
    pub fn new(s: f64) -> Result<Self> {
        if s == f64::INFINITY {
            Ok(Self::Infinite)
        } else if s.is_finite() && s > 0.0 {
            Ok(Self::Finite(s))
        } else {
            Err(Error::InvalidInverseTemperature(s))
        }
    }

    /// `s = ln((nu + 1/2) / (nu - 1/2))`, with `nu <= 1/2 + pure_tol` mapped to infinity.
    pub fn from_symplectic_eigenvalue(nu: f64, pure_tol: f64) -> Self {
        let excess = nu - 0.5;
        if excess <= pure_tol {
            Self::Infinite
        } else {
            Self::Finite((1.0 / excess).ln_1p())
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinite)
    }

    pub fn value(&self) -> f64 {
        match *self {
            Self::Finite(s) => s,
            Self::Infinite => f64::INFINITY,
        }
    }

    /// `e^{-s}`, the probability of detecting at least one quantum.
    pub fn success_probability(&self) -> f64 {
        match *self {
            Self::Finite(s) => (-s).exp(),
            Self::Infinite => 0.0,
        }
    }

    /// `1 - e^{-s}`.
    pub fn failure_probability(&self) -> f64 {
        match *self {
            Self::Finite(s) => -(-s).exp_m1(),
            Self::Infinite => 1.0,
        }
    }

    /// `ln(1 - e^{-s})`, zero for the vacuum.
    pub fn ln_failure_probability(&self) -> f64 {
        match *self {
            Self::Finite(s) => (-(-s).exp_m1()).ln(),
            Self::Infinite => 0.0,
        }
    }

    /// `(1/2) coth(s/2)`, exactly 1/2 for the vacuum.
    pub fn symplectic_eigenvalue(&self) -> f64 {
        match *self {
            Self::Finite(s) => 0.5 / (0.5 * s).tanh(),
            Self::Infinite => 0.5,
        }
    }

    /// `factor · s` for `factor > 0`; infinity stays infinite.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            Self::Finite(s) => Self::Finite(s * factor),
            Self::Infinite => Self::Infinite,
        }
    }
}

impl Serialize for InverseTemperature {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => serializer.serialize_f64(*v),
            Self::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for InverseTemperature {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Token(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(v) if v > 0.0 && v.is_finite() => Ok(Self::Finite(v)),
            Repr::Number(v) => Err(serde::de::Error::custom(format!("inverse temperature must be positive, found {v}"))),
            Repr::Token(t) if t == "inf" => Ok(Self::Infinite),
            Repr::Token(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", found {t:?}"))),
        }
    }
}

impl fmt::Display for InverseTemperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(s) => write!(f, "{s}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: Vec<Complex64>,
    cov: RealMatrix,
}

impl GaussianState {
    /// Validates the covariance against `C + (i/2) J >= 0` at [`DEFAULT_TOL`].
    pub fn new(mean: Vec<Complex64>, cov: RealMatrix) -> Result<Self> {
        Self::with_tolerance(mean, cov, DEFAULT_TOL)
    }

    pub fn with_tolerance(mean: Vec<Complex64>, cov: RealMatrix, tol: f64) -> Result<Self> {
        let n = mode_count(&cov)?;
        if mean.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: mean.len() });
        }
        if mean.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let min_eig = linalg::uncertainty_min_eigenvalue(&cov, tol)?;
        if min_eig < -tol {
            return Err(Error::UncertaintyViolation(min_eig));
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        Ok(Self { mean, cov })
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        Ok(Self { mean: vec![Complex64::new(0.0, 0.0); n], cov: RealMatrix::identity(2 * n, 2 * n) * 0.5 })
    }

    pub fn coherent(beta: &[Complex64]) -> Result<Self> {
        Self::vacuum(beta.len())?.displace(beta)
    }

    /// Single-mode thermal state `(1 - e^{-s}) e^{-s a†a}`.
    pub fn thermal(s: f64) -> Result<Self> {
        Self::product_thermal(&[InverseTemperature::new(s)?])
    }

    /// Product of thermal modes, mean zero and covariance `D(s)`.
    pub fn product_thermal(s: &[InverseTemperature]) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::ZeroModes);
        }
        let nu: Vec<f64> = s.iter().map(InverseTemperature::symplectic_eigenvalue).collect();
        Ok(Self { mean: vec![Complex64::new(0.0, 0.0); s.len()], cov: doubled_diagonal(&nu) })
    }

    pub fn modes(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[Complex64] {
        &self.mean
    }

    pub fn covariance(&self) -> &RealMatrix {
        &self.cov
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.modes() {
            return Err(Error::DimensionMismatch { expected: self.modes(), found: len });
        }
        Ok(())
    }

    /// `Tr W(u) rho = exp[2i (y·Re m - x·Im m) - (x, y)^T C (x, y)]`.
    pub fn characteristic_function(&self, u: &[Complex64]) -> Result<Complex64> {
        self.check_len(u.len())?;
        let v = complex_to_phase_space(u);
        let quad = v.dot(&(&self.cov * &v));
        let phase: f64 = u.iter().zip(&self.mean).map(|(u, m)| u.im * m.re - u.re * m.im).sum();
        Ok(Complex64::new(-quad, 2.0 * phase).exp())
    }

    /// `W(z) rho W(z)^†`: the mean shifts by `z`.
    pub fn displace(&self, z: &[Complex64]) -> Result<Self> {
        self.check_len(z.len())?;
        let mean = self.mean.iter().zip(z).map(|(m, z)| m + z).collect();
        Ok(Self { mean, cov: self.cov.clone() })
    }

    /// `Γ(M)^{-1} rho Γ(M)`, the state with mean `M^{-1} ∘ m` and covariance `M^T C M`.
    pub fn conjugate_symplectic(&self, m: &RealMatrix) -> Result<Self> {
        let n = mode_count(m)?;
        self.check_len(n)?;
        let residual = linalg::symplectic_residual(m)?;
        if residual > DEFAULT_TOL * (1.0 + max_abs(m).powi(2)) {
            return Err(Error::NotSymplectic(residual));
        }
        let mean = symplectic_complex_action(&symplectic_inverse(m)?, &self.mean)?;
        let cov = m.transpose() * &self.cov * m;
        let cov = (&cov + cov.transpose()) * 0.5;
        Ok(Self { mean, cov })
    }

    pub fn williamson(&self) -> Result<WilliamsonForm> {
        linalg::williamson(&self.cov, DEFAULT_TOL)
    }

    pub fn standard_form(&self) -> Result<StandardForm> {
        self.standard_form_with(PURE_MODE_TOL)
    }

    /// Standard form with an explicit pure-mode threshold on `nu - 1/2`.
    pub fn standard_form_with(&self, pure_tol: f64) -> Result<StandardForm> {
        let w = self.williamson()?;
        // nu descending is s ascending, so mode labels already follow the s order
        let inverse_temperatures =
            w.nu.iter().map(|&nu| InverseTemperature::from_symplectic_eigenvalue(nu, pure_tol)).collect();
        Ok(StandardForm { displacement: self.mean.clone(), symplectic: w.symplectic, inverse_temperatures })
    }

    /// Marginal of mode `k` (zero-based).
    pub fn mode_marginal(&self, k: usize) -> Result<ModeMarginal> {
        let n = self.modes();
        if k >= n {
            return Err(Error::ModeOutOfRange { index: k, modes: n });
        }
        let idx = [k, k + n];
        let cov = RealMatrix::from_fn(2, 2, |r, c| self.cov[(idx[r], idx[c])]);
        Ok(ModeMarginal { mean: self.mean[k], cov })
    }

    pub fn marginals(&self) -> Vec<ModeMarginal> {
        (0..self.modes()).map(|k| self.mode_marginal(k).expect("index in range")).collect()
    }
}

/// `rho = W(ell) Γ(L^{-1}) (⊗ rho(s_k)) Γ(L^{-1})^{-1} W(ell)^{-1}` with
/// `C = L^T D(s) L`, where `L` is the stored Williamson factor.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardForm {
    pub displacement: Vec<Complex64>,
    /// Williamson factor `L` with `C = L^T D(s) L`.
    pub symplectic: RealMatrix,
    /// Ascending; pure modes last.
    pub inverse_temperatures: Vec<InverseTemperature>,
}

impl StandardForm {
    pub fn modes(&self) -> usize {
        self.inverse_temperatures.len()
    }

    /// The symplectic `M = L^{-1}` whose conjugation `Γ(M)^{-1} · Γ(M)`, after
    /// removing the displacement, brings the state to the product thermal form.
    pub fn disentangler(&self) -> RealMatrix {
        symplectic_inverse(&self.symplectic).expect("stored factor has even dimension")
    }

    pub fn covariance(&self) -> RealMatrix {
        let nu: Vec<f64> = self.inverse_temperatures.iter().map(InverseTemperature::symplectic_eigenvalue).collect();
        self.symplectic.transpose() * doubled_diagonal(&nu) * &self.symplectic
    }

    pub fn pure_modes(&self) -> usize {
        self.inverse_temperatures.iter().filter(|s| s.is_infinite()).count()
    }
}

/// One-mode reduction `rho(m, T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMarginal {
    pub mean: Complex64,
    pub cov: RealMatrix,
}

impl ModeMarginal {
    pub fn trace_cov(&self) -> f64 {
        self.cov[(0, 0)] + self.cov[(1, 1)]
    }

    /// Mean photon number `(Tr T + 2|m|^2 - 1) / 2`.
    pub fn mean_photon_number(&self) -> f64 {
        0.5 * (self.trace_cov() + 2.0 * self.mean.norm_sqr() - 1.0)
    }

    pub fn is_vacuum(&self, tol: f64) -> bool {
        let dev = &self.cov - RealMatrix::identity(2, 2) * 0.5;
        self.mean.norm() <= tol && max_abs(&dev) <= tol
    }

    pub fn to_state(&self) -> Result<GaussianState> {
        GaussianState::new(vec![self.mean], self.cov.clone())
    }
}

pub fn is_vacuum_marginal(mm: &ModeMarginal, tol: f64) -> bool {
    mm.is_vacuum(tol)
}

/// Real phase-space vector `(Re m, Im m)` of an annihilation mean.
pub fn mean_vector(mean: &[Complex64]) -> DVector<f64> {
    complex_to_phase_space(mean)
}
