use thiserror::Error;

/// Errors produced by every computation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// One or more parameter constraints were violated; every violation is listed.
    #[error("invalid parameters: {}", .0.join("; "))]
    Validation(Vec<String>),

    /// An argument lies outside the domain of a function (pole, branch cut, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested parameter regime is not covered by the operation.
    #[error("unsupported regime: {0}")]
    Unsupported(String),

    /// A series or iteration did not converge within its cap.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// Floating-point cancellation destroyed too many significant digits.
    #[error("cancellation at k = {k}: {digits:.1} decimal digits lost")]
    Cancellation { k: usize, digits: f64 },

    /// Any other numerical failure (negative probabilities, imaginary residue, ...).
    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(vec![msg.into()])
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Process exit code used by the command-line front-end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Domain(_) | Error::Unsupported(_) => 2,
            Error::Io(_) | Error::Json(_) => 2,
            Error::NonConvergence(_) | Error::Cancellation { .. } | Error::Numeric(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
