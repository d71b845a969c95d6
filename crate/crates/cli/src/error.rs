use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] nullfiber::Error),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("bad argument {name}: {message}")]
    Argument { name: &'static str, message: String },
}

impl CliError {
    /// 2 schema/input, 3 dimension, 4 empty kernel, 5 internal.
    pub fn exit_code(&self) -> i32 {
        use nullfiber::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::Schema { .. }
                | E::InvalidNetwork(_)
                | E::NonSpdOutputMetric(_)
                | E::InvalidArgument(_)
                | E::AmbiguousDirection(_)
                | E::EmptyCurve => 2,
                E::DimensionMismatch { .. } | E::InvalidRange { .. } => 3,
                E::EmptyKernel => 4,
                E::StepRejected { .. } => 5,
            },
            CliError::Read { .. } | CliError::Argument { .. } => 2,
            CliError::Write { .. } => 5,
        }
    }
}
