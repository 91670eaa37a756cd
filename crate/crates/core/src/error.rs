use thiserror::Error;

/// Errors raised by the library.
///
/// The variants split into two families: `Input*`-like failures (bad shapes,
/// values outside a function's domain, invalid states or channels) and
/// `Unsupported`/`NoUniformBound`, which signal a well-formed request that the
/// library deliberately does not answer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TelesimError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{name} = {value} is outside the domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("classification ambiguous: {0}")]
    Ambiguous(String),

    #[error("no uniform bound: {0}")]
    NoUniformBound(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl TelesimError {
    /// True for errors that reject a well-formed request outside the supported domain
    /// (as opposed to malformed or invalid input).
    pub fn is_unsupported(&self) -> bool {
        matches!(self, Self::NoUniformBound(_) | Self::Unsupported(_))
    }

    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Self::Domain {
            name,
            value,
            domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, TelesimError>;
