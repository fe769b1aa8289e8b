use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a mathematical function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A series or iteration did not reach the requested tolerance.
    #[error("no convergence in {function} after {terms} terms")]
    NoConvergence {
        function: &'static str,
        terms: usize,
    },
    /// A caller-side precondition was violated (empty block, energy outside the fuzzy band, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A parameter or configuration value is invalid.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::NoConvergence { .. })
    }
}
