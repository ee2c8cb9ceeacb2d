use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "solver did not converge after {iterations} iterations (last residual {residual:.3e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("rent loop for u did not converge after {iterations} outer iterations (last relative change {relative_change:.3e})")]
    OuterNonConvergence {
        iterations: usize,
        relative_change: f64,
    },

    /// The endogenous-u fixed point collapses to u = 0.
    #[error("degenerate rent loop: {0}")]
    DegenerateRentLoop(String),

    #[error("design matrix is rank deficient; dependent columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("restriction covariance is singular")]
    SingularCovariance,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("duplicate observation for {year}-{month:02}")]
    DuplicateMonth { year: i32, month: u32 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
