use thiserror::Error;

/// Errors raised by problems, estimators, proximal maps and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("estimator refresh is due (step {iter_in_epoch} of epoch length {epoch_len}); call refresh first")]
    EpochViolation {
        iter_in_epoch: usize,
        epoch_len: usize,
    },

    #[error("estimator has never been refreshed")]
    NotRefreshed,

    #[error("non-finite iterate at k = {k}")]
    NonFinite { k: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("config rejected: {0}")]
    Config(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("optimal value is unknown; supply one or compute a reference optimum")]
    UnknownOptimum,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
