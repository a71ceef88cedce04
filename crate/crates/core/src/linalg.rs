//! Real dense linear algebra for symmetric and symplectic `2n x 2n` matrices.
//!
//! Phase-space vectors are ordered `(x_1, ..., x_n, y_1, ..., y_n)`, so mode `k`
//! occupies indices `k` and `k + n`. The symplectic form is
//! `J = [[0, I], [-I, 0]]` and `Sp(2n) = { L : L^T J L = J }`.
//!
//! # Williamson decomposition
//!
//! [`williamson`] returns `(L, nu)` with `C = L^T diag(nu, nu) L`. The route:
//!
//! 1. `A = C^{-1/2} J C^{-1/2}` is real antisymmetric with eigenvalues `±i/nu_k`.
//! 2. The Hermitian matrix `iA` is diagonalised; an eigenvector `w = (a + ib)/sqrt(2)`
//!    of eigenvalue `1/nu > 0` gives an orthonormal pair with `A a = b/nu`, `A b = -a/nu`.
//! 3. Collecting `O = [b_1 .. b_n | a_1 .. a_n]` gives
//!    `O^T A O = D^{-1/2} J D^{-1/2}` with `D = diag(nu, nu)`, hence
//!    `S = C^{-1/2} O D^{1/2}` is symplectic with `S^T C S = D`.
//! 4. `L = S^{-1} = D^{-1/2} O^T C^{1/2}`.
//!
//! Only the reconstruction identities are contractual: with repeated `nu_k` the
//! symplectic factor is not unique.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type RealMatrix = DMatrix<f64>;

/// Default tolerance for validity checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Bound on the symplectic and reconstruction residuals accepted from [`williamson`].
pub const WILLIAMSON_RESIDUAL_TOL: f64 = 1e-8;

/// Largest absolute entry.
pub fn max_abs(m: &RealMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Number of modes `n` of a `2n x 2n` matrix.
pub fn mode_count(m: &RealMatrix) -> Result<usize> {
    let (rows, cols) = m.shape();
    if rows != cols || rows == 0 || rows % 2 != 0 {
        return Err(Error::NotEvenSquare { rows, cols });
    }
    Ok(rows / 2)
}

fn check_finite(m: &RealMatrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn asymmetry(m: &RealMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Rejects non-square, non-finite or asymmetric input. The asymmetry bound is
/// relative to the largest entry.
pub(crate) fn check_symmetric(m: &RealMatrix, tol: f64) -> Result<()> {
    let (rows, cols) = m.shape();
    if rows != cols || rows == 0 {
        return Err(Error::NotSquare { rows, cols });
    }
    check_finite(m)?;
    let asym = asymmetry(m);
    if asym > tol * (1.0 + max_abs(m)) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

fn symmetrized(m: &RealMatrix) -> RealMatrix {
    (m + m.transpose()) * 0.5
}

/// The canonical symplectic form `[[0, I_n], [-I_n, 0]]`.
pub fn symplectic_form(n: usize) -> Result<RealMatrix> {
    if n == 0 {
        return Err(Error::ZeroModes);
    }
    let mut j = RealMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, k + n)] = 1.0;
        j[(k + n, k)] = -1.0;
    }
    Ok(j)
}

/// `max |L^T J L - J|`.
pub fn symplectic_residual(l: &RealMatrix) -> Result<f64> {
    let n = mode_count(l)?;
    check_finite(l)?;
    let j = symplectic_form(n)?;
    Ok(max_abs(&(l.transpose() * &j * l - &j)))
}

pub fn is_symplectic(l: &RealMatrix, tol: f64) -> Result<bool> {
    Ok(symplectic_residual(l)? <= tol)
}

/// Inverse of a symplectic matrix, `L^{-1} = -J L^T J`.
pub fn symplectic_inverse(l: &RealMatrix) -> Result<RealMatrix> {
    let j = symplectic_form(mode_count(l)?)?;
    Ok(-(&j * l.transpose() * &j))
}

/// Smallest eigenvalue of the Hermitian matrix `C + (i/2) J`.
pub fn uncertainty_min_eigenvalue(c: &RealMatrix, tol: f64) -> Result<f64> {
    let n = mode_count(c)?;
    check_symmetric(c, tol)?;
    let j = symplectic_form(n)?;
    let c = symmetrized(c);
    let h = DMatrix::from_fn(2 * n, 2 * n, |r, s| Complex64::new(c[(r, s)], 0.5 * j[(r, s)]));
    let eig = SymmetricEigen::new(h);
    Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// True iff `C + (i/2) J` is positive semidefinite up to `tol`.
pub fn is_valid_covariance(c: &RealMatrix, tol: f64) -> Result<bool> {
    Ok(uncertainty_min_eigenvalue(c, tol)? >= -tol)
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Orthogonal matrix whose columns are the eigenvectors.
    pub vectors: RealMatrix,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> RealMatrix {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(&self.values));
        &self.vectors * d * self.vectors.transpose()
    }

    /// `Q f(Lambda) Q^T`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealMatrix {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&v| f(v)),
        ));
        &self.vectors * d * self.vectors.transpose()
    }
}

pub fn eig_symmetric(a: &RealMatrix) -> Result<EigenDecomposition> {
    check_symmetric(a, DEFAULT_TOL)?;
    let eig = SymmetricEigen::new(symmetrized(a));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = RealMatrix::from_fn(a.nrows(), a.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenDecomposition { values, vectors })
}

fn spd_eigen(a: &RealMatrix) -> Result<EigenDecomposition> {
    let eig = eig_symmetric(a)?;
    let smallest = eig.values[0];
    if smallest <= 0.0 {
        return Err(Error::NotPositiveDefinite(smallest));
    }
    Ok(eig)
}

/// Symmetric square root of a symmetric positive definite matrix.
pub fn sqrt_spd(a: &RealMatrix) -> Result<RealMatrix> {
    Ok(spd_eigen(a)?.map(f64::sqrt))
}

/// Symplectic spectrum of a symmetric positive definite matrix, descending.
///
/// Computed from the eigenvalues `±nu_k` of the Hermitian matrix
/// `i C^{1/2} J C^{1/2}`; it does not require `C` to be a valid covariance.
pub fn symplectic_spectrum(c: &RealMatrix) -> Result<Vec<f64>> {
    let n = mode_count(c)?;
    let root = sqrt_spd(c)?;
    let k = &root * symplectic_form(n)? * &root;
    let h = k.map(|v| Complex64::new(0.0, v));
    let eig = SymmetricEigen::new(h);
    let mut nu: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    nu.sort_by(|a, b| b.total_cmp(a));
    nu.truncate(n);
    Ok(nu)
}

/// Symplectic diagonalisation `C = L^T diag(nu, nu) L`.
#[derive(Debug, Clone, PartialEq)]
pub struct WilliamsonForm {
    /// Symplectic factor `L`.
    pub symplectic: RealMatrix,
    /// Symplectic spectrum, descending.
    pub nu: Vec<f64>,
}

impl WilliamsonForm {
    pub fn modes(&self) -> usize {
        self.nu.len()
    }

    /// `diag(nu, nu)`.
    pub fn normal_form(&self) -> RealMatrix {
        doubled_diagonal(&self.nu)
    }

    /// `L^T diag(nu, nu) L`.
    pub fn reconstruct(&self) -> RealMatrix {
        self.symplectic.transpose() * self.normal_form() * &self.symplectic
    }
}

/// `diag(d_1..d_n, d_1..d_n)`.
pub fn doubled_diagonal(d: &[f64]) -> RealMatrix {
    let n = d.len();
    RealMatrix::from_fn(2 * n, 2 * n, |r, c| if r == c { d[r % n] } else { 0.0 })
}

pub fn williamson(c: &RealMatrix, tol: f64) -> Result<WilliamsonForm> {
    let n = mode_count(c)?;
    let min_eig = uncertainty_min_eigenvalue(c, tol)?;
    if min_eig < -tol {
        return Err(Error::UncertaintyViolation(min_eig));
    }
    let c = symmetrized(c);
    let eig = spd_eigen(&c)?;
    let root = eig.map(f64::sqrt);
    let inv_root = eig.map(|v| 1.0 / v.sqrt());
    let j = symplectic_form(n)?;
    let a = &inv_root * &j * &inv_root;

    let h = a.map(|v| Complex64::new(0.0, v));
    let heig = SymmetricEigen::new(h);
    let mut positive: Vec<usize> = (0..2 * n).filter(|&i| heig.eigenvalues[i] > 0.0).collect();
    if positive.len() != n {
        return Err(Error::NumericalFailure(format!(
            "expected {n} positive eigenvalues of iC^(-1/2)JC^(-1/2), found {}",
            positive.len()
        )));
    }
    // ascending 1/nu is descending nu
    positive.sort_by(|&p, &q| heig.eigenvalues[p].total_cmp(&heig.eigenvalues[q]));

    let mut basis = RealMatrix::zeros(2 * n, 2 * n);
    let mut nu = Vec::with_capacity(n);
    for (k, &idx) in positive.iter().enumerate() {
        nu.push(1.0 / heig.eigenvalues[idx]);
        let w = heig.eigenvectors.column(idx);
        for r in 0..2 * n {
            basis[(r, k)] = std::f64::consts::SQRT_2 * w[r].im;
            basis[(r, k + n)] = std::f64::consts::SQRT_2 * w[r].re;
        }
    }

    let inv_sqrt_d = doubled_diagonal(&nu.iter().map(|v| 1.0 / v.sqrt()).collect::<Vec<_>>());
    let symplectic = inv_sqrt_d * basis.transpose() * root;
    let form = WilliamsonForm { symplectic, nu };

    let sym_res = symplectic_residual(&form.symplectic)?;
    let rec_res = max_abs(&(form.reconstruct() - &c));
    if sym_res > WILLIAMSON_RESIDUAL_TOL || rec_res > WILLIAMSON_RESIDUAL_TOL * (1.0 + max_abs(&c)) {
        return Err(Error::NumericalFailure(format!(
            "Williamson residuals too large (symplectic {sym_res:e}, reconstruction {rec_res:e})"
        )));
    }
    Ok(form)
}

/// `L ∘ u`: with `u = x + iy` and `L = [[A11, A12], [A21, A22]]`, returns
/// `(A11 x + A12 y) + i (A21 x + A22 y)`.
pub fn symplectic_complex_action(l: &RealMatrix, u: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = mode_count(l)?;
    if u.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: u.len() });
    }
    let v = complex_to_phase_space(u);
    Ok(phase_space_to_complex(&(l * v)))
}

/// `x + iy` to the stacked real vector `(x, y)`.
pub fn complex_to_phase_space(u: &[Complex64]) -> DVector<f64> {
    let n = u.len();
    DVector::from_fn(2 * n, |r, _| if r < n { u[r].re } else { u[r - n].im })
}

pub fn phase_space_to_complex(v: &DVector<f64>) -> Vec<Complex64> {
    let n = v.len() / 2;
    (0..n).map(|k| Complex64::new(v[k], v[k + n])).collect()
}

/// Single-mode squeezer `diag(e^r, e^-r)` on mode `k` of an `n`-mode phase space.
pub fn squeezer(n: usize, k: usize, r: f64) -> Result<RealMatrix> {
    let mut m = identity_checked(n, &[k])?;
    m[(k, k)] = r.exp();
    m[(k + n, k + n)] = (-r).exp();
    Ok(m)
}

/// Rotation by `theta` in the `(x_k, y_k)` plane.
pub fn phase_rotation(n: usize, k: usize, theta: f64) -> Result<RealMatrix> {
    let mut m = identity_checked(n, &[k])?;
    let (s, c) = theta.sin_cos();
    m[(k, k)] = c;
    m[(k, k + n)] = -s;
    m[(k + n, k)] = s;
    m[(k + n, k + n)] = c;
    Ok(m)
}

/// Passive mixing of modes `j` and `k`: the same rotation by `theta` applied to
/// `(x_j, x_k)` and `(y_j, y_k)`.
pub fn beamsplitter(n: usize, j: usize, k: usize, theta: f64) -> Result<RealMatrix> {
    let mut m = identity_checked(n, &[j, k])?;
    if j == k {
        return Err(Error::InvalidArgument("beamsplitter needs two distinct modes".into()));
    }
    let (s, c) = theta.sin_cos();
    for off in [0, n] {
        m[(j + off, j + off)] = c;
        m[(j + off, k + off)] = -s;
        m[(k + off, j + off)] = s;
        m[(k + off, k + off)] = c;
    }
    Ok(m)
}

fn identity_checked(n: usize, modes: &[usize]) -> Result<RealMatrix> {
    if n == 0 {
        return Err(Error::ZeroModes);
    }
    if let Some(&index) = modes.iter().find(|&&k| k >= n) {
        return Err(Error::ModeOutOfRange { index, modes: n });
    }
    Ok(RealMatrix::identity(2 * n, 2 * n))
}
