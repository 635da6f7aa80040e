//! Error type shared by every module in this crate.

use thiserror::Error;

/// Everything that can go wrong when building specs, integrating, or
/// post-processing a run.
#[derive(Debug, Error)]
pub enum Error {
    /// A spec or parameter set violates one of its stated invariants.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// The operation is not defined for this signal kind.
    #[error("{operation} is not defined for {kind} signals")]
    UnsupportedKind {
        operation: &'static str,
        kind: &'static str,
    },

    /// The input lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Mismatched or inconsistent run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Integration produced a non-finite state.
    #[error("numeric overflow at step {step}")]
    NumericOverflow { step: usize },

    /// The error trajectory does not decay enough to fit an exponential rate.
    #[error("not enough decay: {0}")]
    NotEnoughDecay(String),

    /// The estimate has not settled, so steady-state statistics would be
    /// meaningless.
    #[error("not converged: {0}")]
    NotConverged(String),
}

pub type Result<T> = std::result::Result<T, Error>;
