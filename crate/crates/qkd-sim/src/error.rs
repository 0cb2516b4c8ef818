//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by simulation, post-processing and I/O operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical or statistical parameter is outside its valid range.
    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// Tick-aligned sequences disagree in length.
    #[error("length mismatch: {context} ({left} vs {right})")]
    LengthMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    /// A protocol step was invoked on data it cannot operate on.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// The shared authentication key pool has no unconsumed bits left.
    #[error("authentication key pool exhausted (need {needed} bits, {available} left)")]
    PoolExhausted { needed: u64, available: u64 },

    /// The two parties' pools disagree about how many bits were consumed.
    #[error("authentication pool desync: expected offset {expected}, message claims {actual}")]
    PoolDesync { expected: u64, actual: u64 },

    /// A key buffer was asked to move backwards through the pipeline.
    #[error("invalid key stage transition: {from:?} -> {to:?}")]
    StageRegression { from: crate::protocol::Stage, to: crate::protocol::Stage },

    /// Configuration file could not be read or parsed.
    #[error("config error: {0}")]
    Config(String),

    /// Underlying I/O failure while emitting reports or transcripts.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter { name, reason: reason.into() }
    }
}
