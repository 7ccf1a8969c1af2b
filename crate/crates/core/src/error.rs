use thiserror::Error;

/// Errors raised by the library. CLI exit codes are derived from these in `cli`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("{what} did not converge (residual {residual:e})")]
    Convergence { what: &'static str, residual: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("state price density {0:e} is not positive at the given state")]
    InvalidState(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid certificate: {0}")]
    Certificate(String),

    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("not representable: {0}")]
    Unrepresentable(String),

    #[error("malformed model document: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
