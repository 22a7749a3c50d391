//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shape mismatch in a tensor or network operation.
    #[error("dimension error in {context}: {detail}")]
    Dimension { context: String, detail: String },

    /// A value that must be finite was NaN or infinite.
    #[error("numeric error in {context}: {detail}")]
    Numeric { context: String, detail: String },

    /// Invalid argument or configuration value.
    #[error("input error: {0}")]
    Input(String),

    /// Estimator preconditions violated (e.g. no negatives available).
    #[error("estimator error: {0}")]
    Estimator(String),

    /// Requested quantity is not defined for the given object.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A class was missing from a training fold.
    #[error("stratification error: {0}")]
    Stratification(String),

    /// Training produced a non-finite loss; identifies where.
    #[error("numeric abort at epoch {epoch}, objective {objective}, term {term}")]
    NumericAbort {
        epoch: usize,
        objective: String,
        term: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error in {context}: {detail}")]
    Parse { context: String, detail: String },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn dimension(context: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Dimension {
            context: context.into(),
            detail: detail.into(),
        }
    }

    pub fn numeric(context: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Numeric {
            context: context.into(),
            detail: detail.into(),
        }
    }

    pub fn parse(context: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            detail: detail.into(),
        }
    }
}
