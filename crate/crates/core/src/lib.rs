//! Multivariate decoded quantum interferometry for weighted Max-LINSAT.
//!
//! The crate evaluates, exactly at small sizes, the objects behind the
//! multivariate DQI construction: the spectral matrix on block degrees and
//! its top eigenvalue, the asymptotic Γ functional, dense simulations of the
//! DQI state, perfect and imperfect decoders, the weighted OPI comparison
//! against Prange, and block Hamiltonian DQI.

pub mod asymptotics;
pub mod decoding;
pub mod error;
pub mod field;
pub mod hamdqi;
pub mod krawtchouk;
pub mod layers;
pub mod opi;
pub mod problem;
pub mod simulator;
pub mod spectral;

/// Library version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, ErrorClass, Result};
pub use hamdqi::{BlockPauliHamiltonian, PauliOperator, Polynomial};
pub use field::{CodeSpec, FieldMatrix, PrimeField};
pub use problem::{BlockStructure, CenteredStats, WeightedMaxLinsatInstance};
pub use spectral::{DegreeIndexSet, SpectralMatrix};
pub use simulator::StateVector;
