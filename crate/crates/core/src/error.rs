use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("dimension {requested} exceeds the configured cap {cap}")]
    Resource { requested: usize, cap: usize },
    #[error("precondition violated: {what} (residual {residual:e})")]
    Precondition { what: String, residual: f64 },
    #[error("exceptional point: {0}")]
    ExceptionalPoint(String),
    #[error("metric not positive, Jordan block suspected (eigenvalue {eigenvalue:e})")]
    JordanBlockSuspected { eigenvalue: f64 },
    #[error("mode {mode} has vanishing bilinear norm {norm:e}")]
    ZeroNorm { mode: usize, norm: f64 },
    #[error("root residual {worst:e} above tolerance")]
    RootResidual { worst: f64 },
    #[error("cross validation failed: {what} (worst deviation {worst:e})")]
    CrossValidation { what: String, worst: f64 },
    #[error("inconsistent linear system: {what} (residual {residual:e})")]
    Inconsistent { what: String, residual: f64 },
    #[error("numerical routine did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
