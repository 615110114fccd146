use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A set, price vector, or weight vector does not match the ground set.
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// An exhaustive operation was asked to run above its desk-scale cap.
    #[error("cap exceeded for {what}: limit {limit}, got {got}")]
    CapExceeded {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    /// An operation precondition was violated (e.g. marginal of an item already in the set).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Instance or gadget data fails a structural invariant.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// Input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInstance(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
