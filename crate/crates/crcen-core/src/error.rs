//! Error type shared by every module in the crate.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors surfaced by the numeric core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Matrix/vector dimensions do not line up.
    Shape(String),
    /// A scalar argument violates its domain (e.g. std <= 0, lambda outside (0,1)).
    Param(String),
    /// Input data violates a contract (labels outside {0,1}, single-class set, empty input).
    Data(String),
    /// A computation produced NaN/Inf or otherwise left the representable domain.
    Numeric(String),
    /// Model configuration is invalid (e.g. output layer width != 1).
    Config(String),
    /// A ratio is undefined because its denominator vanished (degenerate probabilities).
    Degenerate(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape(m) => write!(f, "shape error: {m}"),
            Error::Param(m) => write!(f, "parameter error: {m}"),
            Error::Data(m) => write!(f, "data error: {m}"),
            Error::Numeric(m) => write!(f, "numeric error: {m}"),
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Degenerate(m) => write!(f, "degenerate input: {m}"),
        }
    }
}

impl core::error::Error for Error {}
