use thiserror::Error;

/// Errors raised by the bound, prior, signal and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("quadrature on [{a}, {b}] did not converge (relative change {rel_change:e})")]
    Quadrature { a: f64, b: f64, rel_change: f64 },

    #[error("matrix is numerically singular (smallest pivot at index {index})")]
    Singular { index: usize },

    #[error("exponent {0} overflows after factoring")]
    Overflow(f64),

    #[error("all test points were dropped while conditioning Q")]
    AllPointsDropped,

    #[error("at {point}: {source}")]
    GridPoint { point: String, source: Box<Error> },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// True for errors caused by invalid user input rather than numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) => true,
            Error::GridPoint { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
