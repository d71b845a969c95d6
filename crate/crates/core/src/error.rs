use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid layer range {from}..={to} for a network with {layers} layers")]
    InvalidRange { from: usize, to: usize, layers: usize },

    #[error("output metric is not symmetric positive-definite: {0}")]
    NonSpdOutputMetric(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("polyline needs at least two vertices")]
    EmptyCurve,

    #[error("metric kernel is empty at the current point")]
    EmptyKernel,

    #[error("kernel has dimension {0}; a coefficient vector is required to pick a direction")]
    AmbiguousDirection(usize),

    #[error("kernel dimension changed from {from} to {to} during a step")]
    StepRejected { from: usize, to: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, got })
    }
}
