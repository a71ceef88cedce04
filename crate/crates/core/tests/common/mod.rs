#![allow(dead_code)]

use gaussent::fock::{Generator, OracleState};
use gaussent::linalg::{beamsplitter, doubled_diagonal, phase_rotation, squeezer, RealMatrix};
use gaussent::state::{GaussianState, InverseTemperature};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Product of random rotations, squeezers (|r| <= `squeeze`) and beamsplitters.
pub fn random_symplectic(rng: &mut impl Rng, n: usize, squeeze: f64) -> RealMatrix {
    let tau = std::f64::consts::TAU;
    let mut m = RealMatrix::identity(2 * n, 2 * n);
    for _ in 0..2 {
        for k in 0..n {
            m = phase_rotation(n, k, rng.gen_range(0.0..tau)).unwrap() * m;
            m = squeezer(n, k, rng.gen_range(-squeeze..=squeeze)).unwrap() * m;
            m = phase_rotation(n, k, rng.gen_range(0.0..tau)).unwrap() * m;
        }
        for j in 0..n {
            for k in j + 1..n {
                m = beamsplitter(n, j, k, rng.gen_range(0.0..tau)).unwrap() * m;
            }
        }
    }
    m
}

pub fn random_mean(rng: &mut impl Rng, n: usize, radius: f64) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::from_polar(radius * rng.gen_range(0.0..1.0f64).sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect()
}

/// `C = M^T diag(nu, nu) M` with `nu_k` uniform in `nu_range`.
pub fn random_state(rng: &mut impl Rng, n: usize, nu_range: (f64, f64), squeeze: f64) -> GaussianState {
    let nu: Vec<f64> = (0..n).map(|_| rng.gen_range(nu_range.0..=nu_range.1)).collect();
    let m = random_symplectic(rng, n, squeeze);
    let c = m.transpose() * doubled_diagonal(&nu) * &m;
    GaussianState::new(random_mean(rng, n, 1.0), c).unwrap()
}

/// One-mode recipe from the oracle parameter box: thermal `s in [0.5, 3]`,
/// squeeze `r <= 0.8` at a random angle, displacement `|beta| <= 1`.
pub fn random_recipe(rng: &mut impl Rng) -> OracleState {
    let s = rng.gen_range(0.5..=3.0);
    let r = rng.gen_range(0.0..=0.8);
    let phi = rng.gen_range(0.0..std::f64::consts::PI);
    let beta = random_mean(rng, 1, 1.0)[0];
    OracleState::thermal(&[InverseTemperature::Finite(s)])
        .unwrap()
        .then(Generator::Squeeze { mode: 0, r, phi })
        .unwrap()
        .then(Generator::Displace { mode: 0, beta })
        .unwrap()
}

pub fn states_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("states")
}
