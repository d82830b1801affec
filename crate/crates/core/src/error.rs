use thiserror::Error;

/// Errors produced by the solver stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The convex part of the problem is infeasible, hence so is the whole problem.
    #[error("problem is infeasible")]
    Infeasible,

    #[error("problem is unbounded below")]
    Unbounded,

    #[error("enumeration needs {count} combinations, limit is {limit}")]
    BudgetExceeded { count: u128, limit: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
