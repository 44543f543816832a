//! Simulator and verification harness for lattice models of nonrelativistic
//! quantum dynamics built from local two-q-bit gates.
//!
//! Two families of circuits are provided: a one-dimensional brick-wall
//! kinetic rule with external and pairwise potential phases, and a
//! d-dimensional quantum lattice-gas automaton (advection by pairwise
//! exchange plus a per-site collision unitary). States can be held either as
//! a full 2^N amplitude vector (oracle representation) or restricted to a
//! fixed-particle-number sector (production representation); the analysis
//! module cross-checks the two and verifies dispersion relations, emergent
//! masses, and continuum convergence against independent integrators.

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod gates;
pub mod lattice;
pub mod linalg;
pub mod state;

pub use error::SimError;

/// Complex double precision used throughout.
pub type C64 = num_complex::Complex64;

/// Default tolerance for algebraic identities (unitarity, block structure).
pub const TOL_ALGEBRAIC: f64 = 1e-12;

/// Default tolerance for accumulated floating-point drift over long runs.
pub const TOL_DRIFT: f64 = 1e-9;

/// Largest q-bit count for which a dense 2^N state may be allocated
/// (2^24 amplitudes at 16 bytes each is about 268 MB).
pub const DENSE_QBIT_LIMIT: usize = 24;
