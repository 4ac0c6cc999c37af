use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error(
        "n = {n} is too large for a full distribution vector (limit {limit}); \
         use the edge-count-only mode instead"
    )]
    TooManyNodes { n: usize, limit: usize },

    #[error("quadrature failed to converge: estimate {estimate:e}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("covariance matrix is not positive definite ({0})")]
    NotPositiveDefinite(String),

    #[error("all counts are zero")]
    EmptyCounts,

    #[error("least-squares fit failed: {0}")]
    Fit(String),

    #[error("maximiser {x_max} escaped the search bracket [{lo}, {hi}]")]
    BracketEscape { x_max: f64, lo: f64, hi: f64 },

    #[error("no connection radius realises normalised range t = {t} at d = {d}")]
    NoValidRadius { t: f64, d: usize },

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::NotPositiveDefinite(_)
                | Error::Fit(_)
                | Error::BracketEscape { .. }
                | Error::EmptyCounts
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
