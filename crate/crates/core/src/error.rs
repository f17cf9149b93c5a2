use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A dimension is zero, inconsistent, or exceeds the configured cap.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A subsystem label is unknown, duplicated, or not a permutation.
    #[error("label error: {0}")]
    Label(String),

    /// Matrix shapes or layouts do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// An eigensolver or bisection failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An operator violates the density-matrix invariants.
    #[error("state validation error: {0}")]
    StateValidation(String),

    /// An operator set violates the channel (CPTP) invariants.
    #[error("channel validation error: {0}")]
    ChannelValidation(String),

    /// An argument is outside its documented range.
    #[error("argument error: {0}")]
    Argument(String),

    /// A requested target lies outside the reachable range.
    #[error("range error: {0}")]
    Range(String),

    /// The operation is defined only for a restricted case.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A file could not be parsed under the interchange formats.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
