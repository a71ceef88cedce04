//! Entropies and divergences of bosonic Gaussian states.
//!
//! A [`GaussianState`] is its annihilation mean and covariance. From the
//! standard form (displacement, symplectic factor, thermal inverse temperatures)
//! the [`entropy`] module computes
//!
//! * the von Neumann entropy,
//! * the relative entropy `S(rho || sigma)`, split into classical and quantum
//!   parts and `+inf` when `rho` leaves the support of `sigma`,
//! * the Petz–Rényi relative entropy for `0 < alpha < 1`.
//!
//! [`fock`] rebuilds one- and two-mode states as truncated density matrices
//! and recomputes the same quantities by brute force. [`cli`] is the library
//! side of the `gaussent` binary.
//!
//! ```
//! use gaussent::entropy::{petz_renyi, relative_entropy};
//! use gaussent::GaussianState;
//!
//! # fn main() -> gaussent::Result<()> {
//! let rho = GaussianState::thermal(1.0)?;
//! let sigma = GaussianState::thermal(2.0)?;
//! let s = relative_entropy(&rho, &sigma)?.value().finite().unwrap();
//! let s_half = petz_renyi(&rho, &sigma, 0.5)?.value;
//! assert!(0.0 < s_half && s_half < s);
//! # Ok(())
//! # }
//! ```
//!
//! The guide in `book/` walks through the conventions; its code blocks run as
//! doctests of this crate.

pub mod cli;
pub mod entropy;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod state;

pub use entropy::Divergence;
pub use error::{Error, Result};
pub use state::{GaussianState, InverseTemperature};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/phase-space.md")]
    mod phase_space {}
    #[doc = include_str!("../../../book/src/standard-form.md")]
    mod standard_form {}
    #[doc = include_str!("../../../book/src/relative-entropy.md")]
    mod relative_entropy {}
    #[doc = include_str!("../../../book/src/petz-renyi.md")]
    mod petz_renyi {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
