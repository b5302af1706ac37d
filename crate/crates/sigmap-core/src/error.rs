use alloc::string::String;
use core::fmt;

/// Error type shared by every module in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument violated its precondition (negative std, R <= 0, ...).
    InvalidParameter(&'static str),
    /// Two rasters or maps that must agree in shape do not.
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// Structurally valid input that the operation cannot work with
    /// (all-zero brightness, empty corpus, image smaller than the patch).
    DegenerateInput(&'static str),
    /// A non-finite value showed up where only finite values are allowed.
    /// For the estimator the string names the offending layer.
    NonFinite(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::DimensionMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            Error::DegenerateInput(what) => write!(f, "degenerate input: {what}"),
            Error::NonFinite(where_) => write!(f, "non-finite value in {where_}"),
        }
    }
}

#[cfg(any(test, feature = "std"))]
impl std::error::Error for Error {}
