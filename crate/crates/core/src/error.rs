use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("linear system is singular (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("system matrix asymmetric beyond tolerance (relative {relative:.3e})")]
    Asymmetric { relative: f64 },

    #[error("empty landmark set")]
    EmptyLandmarks,

    #[error("degenerate kernel: landmark Gram block is identically zero")]
    DegenerateKernel,

    #[error("no labeled data")]
    NoLabels,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("unknown value {value:?} in column {column}")]
    UnknownCategory { column: usize, value: String },

    #[error("malformed model file at line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_) => ErrorClass::Usage,
            Error::Singular { .. }
            | Error::Asymmetric { .. }
            | Error::DegenerateKernel
            | Error::NonFinite(_) => ErrorClass::Numerical,
            _ => ErrorClass::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
