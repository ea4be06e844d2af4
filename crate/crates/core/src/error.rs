use thiserror::Error;

/// Failure modes shared by every module of the engine.
///
/// `Domain` covers inputs outside an operation's contract (bad parameters,
/// moments that do not exist, mismatched series orders). `Numerical` and
/// `Quadrature` cover valid inputs for which an algorithm failed to produce a
/// trustworthy number.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (best estimate {estimate:e}, error bound {error_bound:e})"
    )]
    Quadrature {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Prefixes the message with `context`, keeping the error class.
    pub fn context(self, context: impl std::fmt::Display) -> Self {
        match self {
            Error::Domain(m) => Error::Domain(format!("{context}: {m}")),
            Error::Numerical(m) => Error::Numerical(format!("{context}: {m}")),
            quad @ Error::Quadrature { .. } => Error::Numerical(format!("{context}: {quad}")),
        }
    }

    /// True for failures of an algorithm on valid input, as opposed to invalid
    /// input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
