use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidPmf(String),
    #[error("size-biasing requires nonnegative atoms and a positive mean: {0}")]
    SizeBias(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid process configuration: {0}")]
    InvalidConfig(String),
    #[error("numeric overflow: {0}")]
    Overflow(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("enumeration infeasible: {0}")]
    Infeasible(String),
    #[error("operation unsupported for this process: {0}")]
    Unsupported(String),
    #[error("coupling kernel returned a value outside the base support (direction {0})")]
    KernelSupport(usize),
    #[error("left-tail bound requested without a monotone coupling")]
    NotMonotone,
    #[error("mismatched t grids: {0}")]
    GridMismatch(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
