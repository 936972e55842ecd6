//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by encoding, evaluation, search, and statistics routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A bit string or value list did not match the width expected by the
    /// dimension or space.
    #[error("encoding length mismatch: expected {expected}, got {got}")]
    Encoding { expected: usize, got: usize },

    /// A value does not lie on the dimension's grid.
    #[error(
        "value {value} is off the grid of dimension `{dim}` (nearest grid points: {below}, {above})"
    )]
    OffGrid {
        dim: String,
        value: f64,
        below: f64,
        above: f64,
    },

    /// Exhaustive enumeration was requested for a space larger than the limit.
    #[error("enumeration too large: 2^{total_bits} genomes exceeds limit {limit}")]
    EnumerationTooLarge { total_bits: usize, limit: u64 },

    /// Fast evaluation needs at least two epochs to form a difference.
    #[error("fast evaluation undefined: needs at least 2 epochs, got {epochs}")]
    FidelityUndefined { epochs: usize },

    /// Epoch index outside the curve.
    #[error("epoch {t} out of range for a curve of {len} epochs")]
    EpochOutOfRange { t: usize, len: usize },

    /// A crossover cut or mutation position outside the genome.
    #[error("operator position {position} out of range for genome of {len} bits")]
    PositionOutOfRange { position: usize, len: usize },

    /// Roulette selection over an empty score list.
    #[error("selection over an empty score list")]
    EmptySelection,

    /// An objective failed to produce a usable curve for the given assignment.
    #[error("evaluation failed for {assignment}: {reason}")]
    Evaluation { assignment: String, reason: String },

    /// Training produced a non-finite loss or weight.
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    /// A curve violated the objective contract (wrong length, bad entries).
    #[error("objective contract violation: {0}")]
    ObjectiveContract(String),

    /// Invalid configuration value, reported with its field path.
    #[error("invalid config `{field}`: {message}")]
    InvalidConfig { field: String, message: String },

    /// Statistics over an undersized or degenerate sample.
    #[error("invalid sample: {0}")]
    InvalidSample(String),

    /// Malformed report or trial-set CSV.
    #[error("csv format error: {0}")]
    CsvFormat(String),
}

impl Error {
    pub(crate) fn invalid_config(field: &str, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
