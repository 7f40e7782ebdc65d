use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or iterative routine failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The decoy-state bound cannot be applied to these parameters
    /// (ratio condition violated or a non-positive denominator).
    #[error("validity error: {0}")]
    Validity(String),

    /// A truncated photon-number state lost more weight than allowed.
    #[error("truncation error: tail weight {tail:e} exceeds {limit:e}")]
    Truncation { tail: f64, limit: f64 },

    /// The linear program has no feasible point.
    #[error("infeasible linear program: {0}")]
    Infeasible(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validity(msg: impl Into<String>) -> Self {
        Error::Validity(msg.into())
    }
}
