//! Truncated Fock-space oracle for one- and two-mode states.
//!
//! Density matrices are built by starting from thermal modes and applying
//! `U = exp(G)` for displacement, squeezing, phase rotation and beamsplitter
//! generators. Every [`OracleState`] recipe has two readings: a dense
//! [`FockOperator`] and an exact [`GaussianState`] computed from the Heisenberg
//! action of the same generators on `(q, p)`. Divergences on the Fock side are
//! evaluated from eigendecompositions only.
//!
//! Two-mode operators use the basis `|i⟩ ⊗ |j⟩` at index `i * d + j`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::entropy::Divergence;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, RealMatrix};
use crate::state::{GaussianState, InverseTemperature, PURE_MODE_TOL};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Eigenvalues at or below this count as zero for numerically diagonalised operators.
pub const EIG_FLOOR: f64 = 1e-12;

/// Probability mass of `rho` outside the support of `sigma` above which the
/// relative entropy is reported infinite.
pub const MASS_TOL: f64 = 1e-8;

/// Negative eigenvalues down to this are clamped to zero.
pub const PSD_TOL: f64 = 1e-10;

/// Eigendecomposition `sum_i lambda_i |v_i⟩⟨v_i|`.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
    /// Eigenvalues known in closed form (recipe states); zero is then an exact zero.
    pub exact: bool,
}

impl Spectral {
    fn support_floor(&self, eig_floor: f64) -> f64 {
        if self.exact {
            0.0
        } else {
            eig_floor
        }
    }
}

/// A dense operator on `modes` truncated modes of dimension `dim` each.
#[derive(Debug, Clone)]
pub struct FockOperator {
    dim: usize,
    modes: usize,
    matrix: ComplexMatrix,
    spectral: Option<Spectral>,
}

impl FockOperator {
    pub fn from_matrix(dim: usize, modes: usize, matrix: ComplexMatrix) -> Result<Self> {
        check_dim(dim)?;
        if !(1..=2).contains(&modes) {
            return Err(Error::NotRepresentable(format!("{modes} modes; the oracle handles 1 or 2")));
        }
        let size = dim.pow(modes as u32);
        if matrix.shape() != (size, size) {
            return Err(Error::DimensionMismatch { expected: size, found: matrix.nrows() });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, modes, matrix, spectral: None })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `1 - Tr rho`: probability lost above the cutoff.
    pub fn tail_mass(&self) -> f64 {
        1.0 - self.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Stored spectral data, or a fresh Hermitian eigendecomposition.
    pub fn spectral(&self) -> Result<Spectral> {
        if let Some(sp) = &self.spectral {
            return Ok(sp.clone());
        }
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = nalgebra::SymmetricEigen::new(herm);
        let mut eigenvalues = Vec::with_capacity(self.size());
        for &v in eig.eigenvalues.iter() {
            if v < -PSD_TOL {
                return Err(Error::InvalidDensity(format!("eigenvalue {v:e} is negative")));
            }
            eigenvalues.push(v.max(0.0));
        }
        Ok(Spectral { eigenvalues, eigenvectors: eig.eigenvectors, exact: false })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        nalgebra::SymmetricEigen::new(herm).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    fn check_density(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-8 {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {herm:e})")));
        }
        Ok(())
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidTruncation(d))
    } else {
        Ok(())
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Lowering operator on a `d`-level truncation: `√k` on the superdiagonal.
pub fn annihilation_matrix(d: usize) -> Result<FockOperator> {
    check_dim(d)?;
    FockOperator::from_matrix(d, 1, lowering(d))
}

fn lowering(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |r, c| if c == r + 1 { Complex64::new((c as f64).sqrt(), 0.0) } else { zero() })
}

/// Annihilation operator of mode `k` on the `modes`-mode truncated space.
pub fn mode_annihilation(d: usize, modes: usize, k: usize) -> ComplexMatrix {
    embed(&lowering(d), modes, k)
}

/// `op` acting on mode `k`, identity elsewhere.
fn embed(op: &ComplexMatrix, modes: usize, k: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(op.nrows(), op.nrows());
    match (modes, k) {
        (1, _) => op.clone(),
        (_, 0) => op.kronecker(&id),
        _ => id.kronecker(op),
    }
}

/// `theta (a† b - a b†)` assembled entrywise.
fn beamsplitter_generator(d: usize, theta: f64) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            // a† b |i, j> = sqrt((i + 1) j) |i + 1, j - 1>
            if i + 1 < d && j > 0 {
                g[((i + 1) * d + j - 1, i * d + j)] += Complex64::new(theta * (((i + 1) * j) as f64).sqrt(), 0.0);
            }
            // a b† |i, j> = sqrt(i (j + 1)) |i - 1, j + 1>
            if i > 0 && j + 1 < d {
                g[((i - 1) * d + j + 1, i * d + j)] -= Complex64::new(theta * ((i * (j + 1)) as f64).sqrt(), 0.0);
            }
        }
    }
    g
}

/// Complex product through four real products, which use the fast real kernel.
fn cmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex64::new)
}

/// Thermal diagonal `(1 - e^-s) e^{-s k}`, not renormalised. `s = inf` is `|0⟩⟨0|`.
pub fn thermal_density(s: InverseTemperature, d: usize) -> Result<FockOperator> {
    product_thermal_density(&[s], d)
}

pub fn product_thermal_density(s: &[InverseTemperature], d: usize) -> Result<FockOperator> {
    check_dim(d)?;
    if !(1..=2).contains(&s.len()) {
        return Err(Error::NotRepresentable(format!("{} modes; the oracle handles 1 or 2", s.len())));
    }
    let level = |s: &InverseTemperature, k: usize| match *s {
        InverseTemperature::Infinite => {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        }
        InverseTemperature::Finite(sv) => s.failure_probability() * (-sv * k as f64).exp(),
    };
    let size = d.pow(s.len() as u32);
    let eigenvalues: Vec<f64> = (0..size)
        .map(|idx| match s.len() {
            1 => level(&s[0], idx),
            _ => level(&s[0], idx / d) * level(&s[1], idx % d),
        })
        .collect();
    let matrix = ComplexMatrix::from_fn(size, size, |r, c| if r == c { Complex64::new(eigenvalues[r], 0.0) } else { zero() });
    Ok(FockOperator {
        dim: d,
        modes: s.len(),
        matrix,
        spectral: Some(Spectral { eigenvalues, eigenvectors: ComplexMatrix::identity(size, size), exact: true }),
    })
}

/// Gaussian unitaries `U = exp(G)` available to the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    /// `G = beta a† - conj(beta) a`.
    Displace { mode: usize, beta: Complex64 },
    /// `G = (r/2)(e^{-2i phi} a^2 - e^{2i phi} a†^2)`.
    Squeeze { mode: usize, r: f64, phi: f64 },
    /// `G = -i theta a†a`.
    Rotate { mode: usize, theta: f64 },
    /// `G = theta (a_0† a_1 - a_0 a_1†)`.
    BeamSplitter { theta: f64 },
}

impl Generator {
    fn modes_needed(&self) -> usize {
        match *self {
            Self::Displace { mode, .. } | Self::Squeeze { mode, .. } | Self::Rotate { mode, .. } => mode + 1,
            Self::BeamSplitter { .. } => 2,
        }
    }

    /// Anti-Hermitian generator on the truncated space.
    pub fn matrix(&self, d: usize, modes: usize) -> Result<ComplexMatrix> {
        self.check(d, modes)?;
        Ok(match *self {
            Self::Displace { mode, .. } | Self::Squeeze { mode, .. } | Self::Rotate { mode, .. } => {
                embed(&self.single_mode(d), modes, mode)
            }
            Self::BeamSplitter { theta } => beamsplitter_generator(d, theta),
        })
    }

    /// `exp(G)`. Single-mode generators are exponentiated on their own factor;
    /// the beamsplitter conserves `i + j` inside the truncation box and is
    /// exponentiated block by block.
    pub fn unitary(&self, d: usize, modes: usize) -> Result<ComplexMatrix> {
        self.check(d, modes)?;
        Ok(match *self {
            Self::Displace { mode, .. } | Self::Squeeze { mode, .. } | Self::Rotate { mode, .. } => {
                embed(&self.single_mode(d).exp(), modes, mode)
            }
            Self::BeamSplitter { theta } => {
                let g = beamsplitter_generator(d, theta);
                let mut u = ComplexMatrix::zeros(d * d, d * d);
                for total in 0..=2 * (d - 1) {
                    let idx: Vec<usize> =
                        (total.saturating_sub(d - 1)..=total.min(d - 1)).map(|i| i * d + total - i).collect();
                    let block = g.select_rows(&idx).select_columns(&idx).exp();
                    for (r, &ir) in idx.iter().enumerate() {
                        for (c, &ic) in idx.iter().enumerate() {
                            u[(ir, ic)] = block[(r, c)];
                        }
                    }
                }
                u
            }
        })
    }

    fn check(&self, d: usize, modes: usize) -> Result<()> {
        check_dim(d)?;
        if self.modes_needed() > modes {
            return Err(Error::ModeOutOfRange { index: self.modes_needed() - 1, modes });
        }
        Ok(())
    }

    /// The generator on its own mode; the beamsplitter has none.
    fn single_mode(&self, d: usize) -> ComplexMatrix {
        let a = lowering(d);
        match *self {
            Self::Displace { beta, .. } => a.adjoint() * beta - a * beta.conj(),
            Self::Squeeze { r, phi, .. } => {
                let a2 = &a * &a;
                let ad2 = a2.adjoint();
                let e = Complex64::from_polar(1.0, 2.0 * phi);
                (a2 * e.conj() - ad2 * e) * Complex64::new(0.5 * r, 0.0)
            }
            Self::Rotate { theta, .. } => {
                ComplexMatrix::from_fn(d, d, |r, c| if r == c { Complex64::new(0.0, -theta * r as f64) } else { zero() })
            }
            Self::BeamSplitter { .. } => unreachable!("two-mode generator"),
        }
    }

    /// Heisenberg map `U† xi U = S xi + shift` on `xi = (q_1..q_n, p_1..p_n)`.
    fn heisenberg(&self, n: usize) -> (RealMatrix, Vec<f64>) {
        let mut s = RealMatrix::identity(2 * n, 2 * n);
        let mut shift = vec![0.0; 2 * n];
        match *self {
            Self::Displace { mode, beta } => {
                shift[mode] = std::f64::consts::SQRT_2 * beta.re;
                shift[mode + n] = std::f64::consts::SQRT_2 * beta.im;
            }
            Self::Rotate { mode, theta } => {
                let (sn, cs) = theta.sin_cos();
                s[(mode, mode)] = cs;
                s[(mode, mode + n)] = sn;
                s[(mode + n, mode)] = -sn;
                s[(mode + n, mode + n)] = cs;
            }
            Self::Squeeze { mode, r, phi } => {
                let (sn, cs) = (2.0 * phi).sin_cos();
                let (ch, sh) = (r.cosh(), r.sinh());
                s[(mode, mode)] = ch - sh * cs;
                s[(mode, mode + n)] = -sh * sn;
                s[(mode + n, mode)] = -sh * sn;
                s[(mode + n, mode + n)] = ch + sh * cs;
            }
            Self::BeamSplitter { theta } => {
                let (sn, cs) = theta.sin_cos();
                for off in [0, n] {
                    s[(off, off)] = cs;
                    s[(off, off + 1)] = sn;
                    s[(off + 1, off)] = -sn;
                    s[(off + 1, off + 1)] = cs;
                }
            }
        }
        (s, shift)
    }
}

/// `U rho U†` with `U = exp(G)` computed densely.
pub fn apply_generator(rho: &FockOperator, g: &Generator) -> Result<FockOperator> {
    let u = g.unitary(rho.dim, rho.modes)?;
    let matrix = cmul(&cmul(&u, &rho.matrix), &u.adjoint());
    let spectral = rho.spectral.as_ref().map(|sp| Spectral {
        eigenvalues: sp.eigenvalues.clone(),
        eigenvectors: cmul(&u, &sp.eigenvectors),
        exact: sp.exact,
    });
    Ok(FockOperator { dim: rho.dim, modes: rho.modes, matrix, spectral })
}

/// `Tr[exp(a†(u) - a(u)) rho]`.
pub fn oracle_char_fn(rho: &FockOperator, u: &[Complex64]) -> Result<Complex64> {
    if u.len() != rho.modes {
        return Err(Error::DimensionMismatch { expected: rho.modes, found: u.len() });
    }
    // displacements on different modes commute
    let mut w = Generator::Displace { mode: 0, beta: u[0] }.unitary(rho.dim, 1)?;
    if rho.modes == 2 {
        w = w.kronecker(&Generator::Displace { mode: 0, beta: u[1] }.unitary(rho.dim, 1)?);
    }
    // Tr(W rho) = sum_ij W_ij rho_ji
    Ok(w.component_mul(&rho.matrix.transpose()).sum())
}

pub fn oracle_von_neumann_entropy(rho: &FockOperator) -> Result<f64> {
    rho.check_density()?;
    let sp = rho.spectral()?;
    let floor = sp.support_floor(EIG_FLOOR);
    Ok(-sp.eigenvalues.iter().filter(|&&v| v > floor).map(|&v| v * v.ln()).sum::<f64>())
}

/// `|⟨w_j|v_i⟩|^2` for eigenvectors `v_i` of `rho` and `w_j` of `sigma`, indexed `[j, i]`.
fn overlap_weights(rho: &Spectral, sigma: &Spectral) -> RealMatrix {
    cmul(&sigma.eigenvectors.adjoint(), &rho.eigenvectors).map(|z| z.norm_sqr())
}

fn check_pair(rho: &FockOperator, sigma: &FockOperator) -> Result<()> {
    if rho.modes != sigma.modes || rho.dim != sigma.dim {
        return Err(Error::DimensionMismatch { expected: sigma.size(), found: rho.size() });
    }
    rho.check_density()?;
    sigma.check_density()
}

/// `Tr rho (ln rho - ln sigma)` from the two eigendecompositions; `+inf` when
/// `rho` puts more than [`MASS_TOL`] outside the support of `sigma`.
pub fn oracle_relative_entropy(rho: &FockOperator, sigma: &FockOperator, eig_floor: f64) -> Result<Divergence> {
    check_pair(rho, sigma)?;
    let rs = rho.spectral()?;
    let ss = sigma.spectral()?;
    let weights = overlap_weights(&rs, &ss);
    let rho_floor = rs.support_floor(eig_floor);
    let sigma_floor = ss.support_floor(eig_floor);

    let mut outside = 0.0;
    let mut rho_ln_sigma = 0.0;
    for (j, &mu) in ss.eigenvalues.iter().enumerate() {
        let mass: f64 = rs.eigenvalues.iter().enumerate().map(|(i, &lam)| lam * weights[(j, i)]).sum();
        if mu > sigma_floor {
            rho_ln_sigma += mass * mu.ln();
        } else {
            outside += mass;
        }
    }
    if outside > MASS_TOL {
        return Ok(Divergence::Infinite);
    }
    let rho_ln_rho: f64 = rs.eigenvalues.iter().filter(|&&v| v > rho_floor).map(|&v| v * v.ln()).sum();
    Ok(Divergence::Finite(rho_ln_rho - rho_ln_sigma))
}

/// `Tr rho^alpha sigma^(1-alpha)` with matrix powers taken on the eigenvalues.
pub fn oracle_trace_power_overlap(rho: &FockOperator, sigma: &FockOperator, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    check_pair(rho, sigma)?;
    let rs = rho.spectral()?;
    let ss = sigma.spectral()?;
    let weights = overlap_weights(&rs, &ss);
    let mut total = 0.0;
    for (j, &mu) in ss.eigenvalues.iter().enumerate() {
        if mu <= 0.0 {
            continue;
        }
        let mu_pow = mu.powf(1.0 - alpha);
        for (i, &lam) in rs.eigenvalues.iter().enumerate() {
            if lam > 0.0 {
                total += lam.powf(alpha) * mu_pow * weights[(j, i)];
            }
        }
    }
    Ok(total)
}

/// `ln Tr(rho^alpha sigma^(1-alpha)) / (alpha - 1)`.
pub fn oracle_petz_renyi(rho: &FockOperator, sigma: &FockOperator, alpha: f64) -> Result<Divergence> {
    let overlap = oracle_trace_power_overlap(rho, sigma, alpha)?;
    if overlap <= 0.0 {
        return Ok(Divergence::Infinite);
    }
    Ok(Divergence::Finite(overlap.ln() / (alpha - 1.0)))
}

/// An oracle value at truncation `d` next to the same value at `2d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gated {
    pub dim: usize,
    pub value: Divergence,
    pub refined: Divergence,
}

impl Gated {
    /// `|value(d) - value(2d)|`; zero when both are infinite.
    pub fn gap(&self) -> f64 {
        match (self.value, self.refined) {
            (Divergence::Finite(a), Divergence::Finite(b)) => (a - b).abs(),
            (Divergence::Infinite, Divergence::Infinite) => 0.0,
            _ => f64::INFINITY,
        }
    }

    pub fn converged(&self, tol: f64) -> bool {
        self.gap() <= tol
    }
}

/// Evaluate `f` at `d` and `2d`. Small tail mass alone does not make `ln sigma`
/// accurate: truncated squeezers distort the high eigenvectors of `sigma`, so
/// every comparison should pass this gate first.
pub fn gated(d: usize, f: impl Fn(usize) -> Result<Divergence>) -> Result<Gated> {
    Ok(Gated { dim: d, value: f(d)?, refined: f(2 * d)? })
}

/// A state given as thermal modes followed by generator applications.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleState {
    pub temperatures: Vec<InverseTemperature>,
    pub steps: Vec<Generator>,
}

impl OracleState {
    pub fn thermal(temperatures: &[InverseTemperature]) -> Result<Self> {
        if !(1..=2).contains(&temperatures.len()) {
            return Err(Error::NotRepresentable(format!(
                "{} modes; the oracle handles 1 or 2",
                temperatures.len()
            )));
        }
        Ok(Self { temperatures: temperatures.to_vec(), steps: Vec::new() })
    }

    pub fn modes(&self) -> usize {
        self.temperatures.len()
    }

    pub fn then(mut self, g: Generator) -> Result<Self> {
        if g.modes_needed() > self.modes() {
            return Err(Error::ModeOutOfRange { index: g.modes_needed() - 1, modes: self.modes() });
        }
        self.steps.push(g);
        Ok(self)
    }

    /// Dense density matrix at truncation `d` per mode.
    pub fn density(&self, d: usize) -> Result<FockOperator> {
        let mut rho = product_thermal_density(&self.temperatures, d)?;
        for g in &self.steps {
            rho = apply_generator(&rho, g)?;
        }
        Ok(rho)
    }

    /// Exact Gaussian description from the Heisenberg action of the steps.
    pub fn gaussian(&self) -> Result<GaussianState> {
        let n = self.modes();
        let nu: Vec<f64> = self.temperatures.iter().map(InverseTemperature::symplectic_eigenvalue).collect();
        let mut cov = crate::linalg::doubled_diagonal(&nu);
        let mut mean = vec![0.0; 2 * n];
        for g in &self.steps {
            let (s, shift) = g.heisenberg(n);
            let moved = &s * nalgebra::DVector::from_column_slice(&mean);
            mean = moved.iter().zip(&shift).map(|(a, b)| a + b).collect();
            cov = &s * cov * s.transpose();
        }
        // covariance of (p, -q) = J xi
        let j = crate::linalg::symplectic_form(n)?;
        let c = &j * cov * j.transpose();
        let m = (0..n)
            .map(|k| Complex64::new(mean[k], mean[k + n]) / std::f64::consts::SQRT_2)
            .collect();
        GaussianState::new(m, c)
    }

    /// Recipe for a one-mode state, or a two-mode state without inter-mode
    /// correlations: thermal, then a squeezer, then a displacement per mode.
    pub fn from_gaussian(state: &GaussianState) -> Result<Self> {
        let n = state.modes();
        if n > 2 {
            return Err(Error::NotRepresentable(format!("{n} modes; the oracle handles 1 or 2")));
        }
        if n == 2 {
            let c = state.covariance();
            let cross = [(0, 1), (0, 3), (2, 1), (2, 3)].iter().fold(0.0_f64, |acc, &(r, s)| acc.max(c[(r, s)].abs()));
            if cross > 1e-12 * (1.0 + max_abs(c)) {
                return Err(Error::NotRepresentable(
                    "the two modes are correlated; only product two-mode states have a generator recipe here".into(),
                ));
            }
        }
        let mut temps = Vec::with_capacity(n);
        let mut steps = Vec::new();
        for (k, mm) in state.marginals().into_iter().enumerate() {
            // quadrature covariance: Var q, Cov(q, p), Var p
            let var_q = mm.cov[(1, 1)];
            let var_p = mm.cov[(0, 0)];
            let cov_qp = -mm.cov[(0, 1)];
            let nu = (var_q * var_p - cov_qp * cov_qp).sqrt();
            temps.push(InverseTemperature::from_symplectic_eigenvalue(nu, PURE_MODE_TOL));
            let cosh2r = ((var_q + var_p) / (2.0 * nu)).max(1.0);
            let r = 0.5 * cosh2r.acosh();
            if r > 1e-14 {
                let phi = 0.5 * (-cov_qp / nu).atan2((var_p - var_q) / (2.0 * nu));
                steps.push(Generator::Squeeze { mode: k, r, phi });
            }
            if mm.mean.norm() > 0.0 {
                steps.push(Generator::Displace { mode: k, beta: mm.mean });
            }
        }
        Ok(Self { temperatures: temps, steps })
    }
}
