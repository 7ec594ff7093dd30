//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimension or length disagreement between inputs.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A derivative order beyond the configured cache bound was requested.
    #[error("derivative order {requested} exceeds cache bound {max}")]
    DerivativeOrder { requested: usize, max: usize },

    /// A parameter outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Unknown power-delay profile name.
    #[error("unknown channel profile: {0}")]
    UnknownProfile(String),

    /// Numerical degeneracy (singular-value crossing, singular system, ...).
    /// Callers map this onto its own exit code; it signals that the
    /// smoothness assumptions behind the multi-stage architecture fail for
    /// the given channel, not that the implementation broke.
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),
}
