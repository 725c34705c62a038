//! Error type shared across the library.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by model construction, pipeline stages, and fitting.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar failed a range or finiteness check.
    #[error("invalid value: {0}")]
    InvalidValue(String),

    /// An entity id occurs more than once within a list.
    #[error("duplicate id: {0}")]
    DuplicateId(String),

    /// Inputs disagree on dimensions (empty lists, mismatched matrices).
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A pipeline stage was invoked before its prerequisite stage.
    #[error("missing stage: {0}")]
    MissingStage(String),

    /// A mathematical operation left its domain (log or power of a
    /// non-positive input).
    #[error("domain error: {0}")]
    Domain(String),

    /// The regression design is rank deficient.
    #[error("collinear attributes: {0}")]
    Collinear(String),

    /// Every utility in an origin row is zero; probabilities are undefined.
    #[error("degenerate origin: {0}")]
    DegenerateOrigin(String),

    /// The objective did not evaluate to a finite number at the initial point.
    #[error("objective is not finite at the initial point")]
    NonFiniteObjective,
}
