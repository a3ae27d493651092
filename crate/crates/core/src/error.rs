use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Bad arguments: wrong lengths, out-of-range indices, malformed specs.
    #[error("usage error: {0}")]
    Usage(String),

    /// Mathematically undefined operation, e.g. inverting zero.
    #[error("domain error: {0}")]
    Domain(String),

    /// A linear system (or preimage) has no solution.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Profile fails one or more structural identities; every violation is listed.
    #[error("invalid profile: {}", .0.join("; "))]
    InvalidProfile(Vec<String>),

    /// The backward sampler ran out of retries.
    #[error("encoding failed in round {round}, role {role}: retry cap exhausted")]
    EncodingFailure { round: usize, role: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("experiment aborted: {0}")]
    Aborted(String),

    /// A self-check failed; indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
