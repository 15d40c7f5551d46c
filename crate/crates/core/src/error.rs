use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the factorization toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("analog precoder is ill-conditioned (condition number {cond:.3e} exceeds {limit:.1e})")]
    IllConditionedAnalog { cond: f64, limit: f64 },

    #[error(
        "dense Hessian of size {dim}x{dim} exceeds the cap of {cap}; use the identity initial inverse Hessian instead"
    )]
    HessianCapExceeded { dim: usize, cap: usize },

    #[error("construction not applicable: {0}")]
    NotApplicable(String),

    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("covariance is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    InvalidCovariance { min_eig: f64 },

    #[error("{count} input vectors exceed the enumeration cap of {cap}; reduce the stream count or constellation size")]
    EnumerationCap { count: u128, cap: usize },

    #[error("unsupported constellation: {0}")]
    UnsupportedConstellation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line search stalled after {halvings} halvings")]
    LineSearchStall { halvings: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed file: {msg}")]
    Format { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::InvalidDimension(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_)
            | Error::InvalidDimension(_)
            | Error::UnsupportedConstellation(_)
            | Error::EnumerationCap { .. }
            | Error::HessianCapExceeded { .. }
            | Error::NotApplicable(_)
            | Error::InconsistentInput(_) => 2,
            Error::IllConditionedAnalog { .. }
            | Error::Degenerate(_)
            | Error::InvalidCovariance { .. }
            | Error::LineSearchStall { .. } => 3,
            Error::Io { .. } | Error::Format { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
