use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("query ({x:.4}, {y:.4}) m is outside the map")]
    OutOfBounds { x: f64, y: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed map file (line {line}): {msg}")]
    MalformedMap { line: usize, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("all particle weights vanished")]
    DegenerateWeights,

    #[error("circular mean of particle headings is undefined")]
    AmbiguousHeading,

    #[error("no action sequence keeps the vehicle on the map")]
    NoFeasiblePlan,

    #[error("belief has no remaining probability mass on the grid")]
    DegenerateBelief,

    #[error("config error: {0}")]
    Config(String),

    #[error("trace error: {0}")]
    Trace(String),

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping step annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            other => other,
        }
    }
}
