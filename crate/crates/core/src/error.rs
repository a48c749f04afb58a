use alloc::string::String;
use core::fmt;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A numeric argument is outside its admissible range.
    InvalidParameter { name: &'static str, reason: String },
    /// Matrix or vector shapes do not line up.
    DimensionMismatch { expected: usize, found: usize, context: &'static str },
    /// Input contains NaN or infinity.
    NonFinite { context: &'static str },
    /// Dataset construction failed an invariant.
    InvalidDataset(String),
    /// Fewer inputs than the operation needs.
    EmptyInput(&'static str),
    /// The training rows contain only one class.
    SingleClass,
    /// Cholesky factorization of the ridge Gram matrix failed.
    Factorization { condition_estimate: f64 },
    /// The supplied QP Hessian is not symmetric or has a negative diagonal.
    InvalidHessian(String),
    /// A fitted hyperplane has a zero normal vector.
    DegenerateHyperplane { plane: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => write!(f, "invalid parameter `{name}`: {reason}"),
            Error::DimensionMismatch { expected, found, context } => {
                write!(f, "{context}: expected {expected} columns, found {found}")
            }
            Error::NonFinite { context } => write!(f, "{context}: non-finite value"),
            Error::InvalidDataset(msg) => write!(f, "invalid dataset: {msg}"),
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::SingleClass => f.write_str("training data contains a single class"),
            Error::Factorization { condition_estimate } => write!(
                f,
                "ridge Gram factorization failed (condition estimate {condition_estimate:.3e}); increase delta"
            ),
            Error::InvalidHessian(msg) => write!(f, "invalid QP Hessian: {msg}"),
            Error::DegenerateHyperplane { plane } => write!(
                f,
                "hyperplane {plane} has a zero normal vector; lower delta or raise the penalty"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
