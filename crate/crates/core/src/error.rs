use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid mask: {0}")]
    InvalidMask(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("step sizes violate tau1*tau2*(|A|^2+|B|^2) < 1 (product {0})")]
    StepSize(f64),
    #[error("svd failed: {0}")]
    Svd(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("non-finite iterate at restart {restart}")]
    NonFinite {
        restart: usize,
        report: Box<crate::report::SolveReport>,
    },
    #[error("restart scale underflow at restart {restart}")]
    Underflow {
        restart: usize,
        report: Box<crate::report::SolveReport>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
