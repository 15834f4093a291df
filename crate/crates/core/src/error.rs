use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported quadrature: {0}")]
    UnsupportedQuadrature(String),

    #[error("element label {label} out of range (mesh has {count} elements)")]
    ElementOutOfRange { label: usize, count: usize },

    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("penalty {name} must be {requirement}, got {value}")]
    InvalidPenalty {
        name: String,
        requirement: &'static str,
        value: f64,
    },

    #[error("matrix is numerically singular at pivot {index} (|pivot| = {magnitude:e})")]
    SingularMatrix { index: usize, magnitude: f64 },

    #[error("non-finite values in sample {sample}, mode {mode}")]
    NonFinite { sample: usize, mode: usize },

    #[error("unknown quadrature location: {0}")]
    UnknownLocation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            actual,
        })
    }
}
