use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("observable undefined: {0}")]
    UndefinedObservable(String),

    #[error("ill-conditioned gauge: {0}")]
    IllConditionedGauge(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("gamma function pole at {0}")]
    Pole(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inconsistent constraint data: {0}")]
    Inconsistent(String),

    #[error("truncation did not converge: {what} ({diagnostics})")]
    ConvergenceFailure { what: String, diagnostics: String },

    #[error("iteration budget of {iterations} exhausted, gradient norm {grad_norm:.3e}")]
    NotConverged {
        iterations: usize,
        grad_norm: f64,
        last_iterate: Vec<f64>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for numerical non-convergence, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ConvergenceFailure { .. } | Error::NotConverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
