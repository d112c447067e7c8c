use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced by the analysis engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("generator list is empty")]
    EmptyGenerators,

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("not a permutation: {0}")]
    NotAPermutation(String),

    #[error("point {point} out of range for degree {degree}")]
    PointOutOfRange { point: usize, degree: usize },

    #[error("group is not transitive")]
    NotTransitive,

    #[error("minimal nontrivial subdegree is undefined for a regular group")]
    RegularGroup,

    #[error("{what} exceeds cap: {actual} > {limit}")]
    CapExceeded {
        what: &'static str,
        limit: u128,
        actual: u128,
    },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("vertex {0} is on the boundary of the ball")]
    BoundaryVertex(usize),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn cap(what: &'static str, limit: impl Into<u128>, actual: impl Into<u128>) -> Self {
        Error::CapExceeded {
            what,
            limit: limit.into(),
            actual: actual.into(),
        }
    }

    pub(crate) fn hypothesis(msg: impl Into<String>) -> Self {
        Error::Hypothesis(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
