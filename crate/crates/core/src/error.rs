use thiserror::Error;

use crate::lp::LpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no capacity given for edge `{0}`")]
    MissingCapacity(String),

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("unbounded channel capacity: {0}")]
    UnboundedCapacity(String),

    #[error("enumeration guard exceeded: {what} is {actual}, limit {limit}")]
    GuardExceeded {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("cut ratio undefined: no vertex subset separates any commodity pair")]
    UndefinedRatio,

    #[error("linear program {0}")]
    UnexpectedStatus(&'static str),

    #[error(transparent)]
    Solver(#[from] LpError),

    #[error("internal consistency violated: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for the refusal raised by the exhaustive oracles.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::GuardExceeded { .. })
    }
}
