use thiserror::Error;

/// Errors raised by the simulation and analysis layers.
///
/// Configuration parsing has its own error type ([`crate::config::ConfigError`])
/// because the parser reports every problem at once rather than the first.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid state operation: {0}")]
    InvalidState(String),

    #[error("representation mismatch: {0}")]
    Representation(String),

    #[error("dense representation needs {qbits} q-bits, limit is {limit}")]
    DenseLimit { qbits: usize, limit: usize },

    #[error("phase factor has modulus {modulus} (must be unimodular)")]
    NonUnimodular { modulus: f64 },

    #[error("state norm {norm} outside tolerance for this operation")]
    NormOutOfTolerance { norm: f64 },

    #[error("norm drift {drift} exceeded tolerance {tol} at step {step}")]
    NormDrift { drift: f64, tol: f64, step: usize },

    #[error("principal logarithm undefined: eigenvalue at -1 ({context})")]
    LogBranch { context: String },

    #[error("degenerate transfer-matrix eigenvalues at kappa*eps={kappa_eps}: branch selection ambiguous")]
    DegenerateBranch { kappa_eps: f64 },

    #[error("phase unwrapping ambiguous: per-step phase {phase} too large")]
    PhaseUnwrap { phase: f64 },

    #[error("singular matrix in {0}")]
    Singular(String),

    #[error("eigensolver failed to converge: {0}")]
    EigenConvergence(String),

    #[error("{0}")]
    Invalid(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
