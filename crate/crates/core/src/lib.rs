//! Density of states outer measure (DOSoM) for discrete Schrödinger operators
//! `H = A + V` on rooted balls of infinite graphs.
//!
//! The crate covers graph balls for `Z^d`, the hexagonal and triangular
//! lattices and the Bethe lattice, potentials with bounded range, the finite
//! volume operators with their moments and spectra, polynomial approximation
//! of Lipschitz test functions, local DOS functionals with two backends, and
//! metrics on discrete probability measures.

pub mod approx;
pub mod dos;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod operators;
pub mod potentials;

pub use error::{Error, Result};
