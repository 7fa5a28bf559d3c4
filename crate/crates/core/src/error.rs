use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (e.g. `|m| > l`, `Q = 0`).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input data: wrong shapes, non-finite values, asymmetric matrices.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A scenario or sweep description violates one of its invariants.
    /// `field` names the offending configuration key.
    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: String, message: String },

    /// A sweep axis that must list at least one value is empty.
    #[error("sweep axis `{0}` must not be empty")]
    EmptyAxis(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    /// A sweep grid point failed; carries its coordinates.
    #[error("grid point {point} failed: {source}")]
    GridPoint {
        point: String,
        #[source]
        source: Box<Error>,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
