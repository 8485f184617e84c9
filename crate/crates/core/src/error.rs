use thiserror::Error;

use crate::halfint::HalfInt;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid angular-momentum labels or an argument outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A POVM or operator whose block structure does not match the signal.
    #[error("structure mismatch: {0}")]
    Structure(String),

    /// Blocks of dimension three or more are not solved.
    #[error("unsupported block dimension {dim} in sector {label}")]
    UnsupportedDimension { label: HalfInt, dim: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
