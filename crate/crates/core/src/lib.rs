//! Second-order moment dynamics of a quantum particle in gravitational
//! potentials.
//!
//! The state of a wave packet is tracked through its means and second-order
//! central moments ([`moments`]), evolved under the effective Hamiltonian
//! ([`dynamics`]), turned back into wave functions ([`reconstruct`]) and used
//! to evaluate Eötvös parameters, return times and interferometer phases
//! ([`experiments`]).

pub mod constants;
pub mod dynamics;
mod error;
pub mod experiments;
pub mod moments;
pub mod quadrature;
pub mod reconstruct;

pub use error::{Error, Result};

/// Formats a value with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
