use std::path::PathBuf;

/// Errors produced by graph construction, validation and the solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent input (bad ids, bad exponents, support leaks).
    #[error("input error: {0}")]
    Input(String),

    /// A hypothesis required by an equation or inequality is violated.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// A quantity whose logarithm or reciprocal is needed vanished.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An iterative method did not reach its tolerance.
    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// A certified a-priori bound failed; this indicates a solver defect.
    #[error("invariant failure: {0}")]
    Invariant(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn hypothesis(msg: impl Into<String>) -> Self {
        Error::Hypothesis(msg.into())
    }

    /// True for errors that come from the data rather than the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Input(_)
                | Error::Hypothesis(_)
                | Error::Degenerate(_)
                | Error::Parse { .. }
                | Error::Io { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
