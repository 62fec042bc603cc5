//! Crate-wide error type.

use thiserror::Error;

/// Unified error type for every stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed container or corrupt data (bad WAV header, non-finite
    /// samples, broken blob).
    #[error("format error: {0}")]
    Format(String),

    /// Well-formed but unsupported encoding (e.g. 24-bit WAV, 5.1 audio).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Manifest schema violation, reported with its line number.
    #[error("manifest schema error at line {line}: {message}")]
    Schema { line: usize, message: String },

    /// Model file cannot be used: wrong version, truncated, or produced by
    /// an incompatible build.
    #[error("incompatible model file: {0}")]
    IncompatibleModel(String),

    /// Caller violated an operation's preconditions.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input too short or too small for the requested operation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Fewer than three paired steps; no cycle can be formed.
    #[error("insufficient steps: found {found}, need at least 3")]
    InsufficientSteps { found: usize },

    /// Training data cannot support a model (e.g. all rows identical).
    #[error("degenerate training data: {0}")]
    DegenerateData(String),

    /// Feature vector layout does not match what a model was trained on.
    #[error("feature layout mismatch: expected {expected}, got {got}")]
    LayoutMismatch { expected: String, got: String },

    /// Left/right cycles do not belong to the same subject and session.
    #[error("cycle pairing error: {0}")]
    Pairing(String),

    /// Metric is undefined because one class is empty.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Energy ratio of a zero-energy clip.
    #[error("undefined ratio: clip has zero spectral energy")]
    UndefinedRatio,

    /// Requested split cannot be formed from the available cycles.
    #[error("sizing error: {0}")]
    Sizing(String),

    /// Cost stage table is missing a required entry.
    #[error("stage table is missing entry '{0}'")]
    MissingStage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
