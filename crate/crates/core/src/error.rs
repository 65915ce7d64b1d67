use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shape mismatch, out-of-range index, violated precondition on an input.
    #[error("argument error: {0}")]
    Argument(String),

    /// Input outside the mathematical domain of the operation (e.g. `Re(θ) <= 0`).
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix could not be inverted to the requested residual.
    #[error("singular or ill-conditioned matrix: {message} (residual {residual:.3e})")]
    Singular { message: String, residual: f64 },

    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Model or grid construction failed (negative rates, off-grid mass, ...).
    #[error("construction error: {0}")]
    Construction(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 for domain/config errors, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Singular { .. } | Error::Numeric(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
