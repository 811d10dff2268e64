//! Error types shared across the kernel and the engines built on it.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// A variable is used with an inconsistent or illegal sort.
    #[error("sort error on variable `{var}`: {detail}")]
    Sort { var: String, detail: String },

    /// Substitution would capture a bound variable.
    #[error("substitution capture on variable `{var}`")]
    Capture { var: String },

    /// Time shift applied to a formula with absolute indices.
    #[error("cannot shift variable `{var}`: absolute time index")]
    ShiftDomain { var: String },

    /// Evaluation hit a variable the assignment does not cover.
    #[error("unbound variable `{var}` during evaluation")]
    Unbound { var: String },

    /// The input leaves the supported linear fragment.
    #[error("unsupported theory: {0}")]
    UnsupportedTheory(String),

    /// A configured resource cap was exceeded.
    #[error("resource cap exceeded: {0}")]
    Resource(String),

    /// An operation was called outside its contract.
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;
