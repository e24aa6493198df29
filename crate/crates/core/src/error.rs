use thiserror::Error;

/// Errors raised by the exact computations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A polynomial division that must be exact left a remainder.
    #[error("inexact division: {0}")]
    InexactDivision(String),

    /// A brute-force enumeration would exceed the configured budget.
    #[error("instance too large: enumeration size {size} exceeds budget {budget}")]
    BudgetExceeded { size: u128, budget: u128 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
