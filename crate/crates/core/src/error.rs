use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical or numerical parameter violates its documented invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Dense solve hit an exactly singular (or non-finite) matrix.
    #[error("singular system at lambda = {lambda} nm (condition estimate {cond:.3e})")]
    Singular { lambda: f64, cond: f64 },

    /// A computed quantity came out non-finite.
    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    /// Two grids or vectors that must line up do not.
    #[error("length mismatch in {context}: expected {expected}, got {got}")]
    Mismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
