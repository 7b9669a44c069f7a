use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A feature layout violates its own invariants.
    InvalidLayout(String),
    /// A matrix or vector does not match the dimensions implied by a layout.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// NaN or infinite value where only finite values are allowed.
    NonFinite { what: &'static str, index: usize },
    /// Label matrix is not one-hot or has too few classes.
    InvalidLabels(String),
    /// A hyperparameter is out of range.
    InvalidConfig { field: &'static str, reason: String },
    /// A linear system that must be symmetric positive definite is not.
    Singular(String),
    /// Argument violates an operation precondition.
    Precondition(String),
    /// Synthetic generation spec is invalid.
    InvalidSpec(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidLayout(msg) => write!(f, "invalid feature layout: {msg}"),
            Error::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(
                f,
                "dimension mismatch for {what}: expected {expected}, found {found}"
            ),
            Error::NonFinite { what, index } => {
                write!(f, "non-finite value in {what} at flat index {index}")
            }
            Error::InvalidLabels(msg) => write!(f, "invalid labels: {msg}"),
            Error::InvalidConfig { field, reason } => {
                write!(f, "invalid configuration for {field}: {reason}")
            }
            Error::Singular(msg) => write!(f, "singular system: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::InvalidSpec(msg) => write!(f, "invalid synthetic spec: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

pub(crate) fn check_finite(what: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { what, index }),
        None => Ok(()),
    }
}
