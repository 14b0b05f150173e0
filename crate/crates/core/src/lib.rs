//! Exact Satake transforms on unramified Hecke algebras of split classical
//! groups, Macdonald Plancherel densities and their moments, Sato-Tate
//! measures, Frobenius-Schur symmetry-type classification, Haar-sampled
//! random-matrix one-level densities, and the prime-side main-term pipeline
//! that ties them together.
//!
//! The exact layer works in Q[q^{1/2}, q^{-1/2}] with no floating point;
//! the numeric layer exists to cross-check the exact layer and to drive
//! Monte Carlo experiments.

pub mod error;
pub mod hall_littlewood;
pub mod hecke;
pub mod laurent;
pub mod one_level;
pub mod plancherel;
pub mod rmt;
pub mod root_data;
pub mod sato_tate;
pub mod selftest;
pub mod symmetry;

pub use error::{Error, Result};
pub use laurent::HalfLaurent;
pub use root_data::{build_root_datum, CartanType, RootDatum, Weight};

/// Crate version, for run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
