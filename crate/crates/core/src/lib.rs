//! Desk-scale laboratory for lattice protocols and worst-case to average-case
//! reductions.
//!
//! Everything here runs at small rank (default cap n <= 12) with exact
//! rational arithmetic for lattice identities and brute-force ground truth,
//! and binary64 for Gaussian mass sums and Monte Carlo. The point is not
//! performance: it is that completeness, soundness, and distributional claims
//! are actually testable against exact oracles.

pub mod enumerate;
pub mod error;
pub mod fixtures;
pub mod formulas;
pub mod gaussian;
pub mod geometry;
pub mod hermite;
pub mod json;
pub mod lattice;
pub mod lll;
pub mod moments;
pub mod precise;
pub mod protocols;
pub mod rational;
pub mod reductions;
pub mod rng;
pub mod sampler;
pub mod solvers;
pub mod stats;
pub mod verifiers;

pub use error::Error;
pub use lattice::{Basis, FloatLattice, LatticeVector, Target};
pub use rational::Rat;
pub use solvers::EnumerationCaps;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
