use thiserror::Error;

/// Errors raised by the decomposition toolkit.
///
/// The variants mirror the failure classes callers need to tell apart: bad
/// shapes, inputs outside an operation's domain, violations of the CP order,
/// and internal cross-checks that disagree beyond tolerance.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Dimensions or block structures do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The input is well-formed but outside the operation's domain
    /// (not CP, not invariant, not abelian, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A map that was required to be dominated by another is not.
    #[error("order violation: {0}")]
    OrderViolation(String),

    /// Two independent computations that must agree did not.
    #[error("numerical consistency error: {0}")]
    NumericalConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn consistency(msg: impl Into<String>) -> Error {
    Error::NumericalConsistency(msg.into())
}
