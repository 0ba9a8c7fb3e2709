use alloc::string::String;
use core::fmt;

/// Everything that can go wrong inside the numerical kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidParameter(String),
    UnknownName(String),
    OutOfDomain(String),
    Quadrature(String),
    NonConvergence(String),
    NonPositive(String),
    Cfl { dt: f64, limit: f64 },
    Degenerate(String),
    Mismatch(String),
    Unclassifiable(String),
    NotNonparabolic(String),
    BlowUp(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(s) => write!(f, "invalid parameter: {s}"),
            Error::UnknownName(s) => write!(f, "unknown name: {s}"),
            Error::OutOfDomain(s) => write!(f, "outside domain: {s}"),
            Error::Quadrature(s) => write!(f, "quadrature failed: {s}"),
            Error::NonConvergence(s) => write!(f, "no convergence: {s}"),
            Error::NonPositive(s) => write!(f, "non-positive value: {s}"),
            Error::Cfl { dt, limit } => write!(f, "time step {dt:e} exceeds CFL limit {limit:e}"),
            Error::Degenerate(s) => write!(f, "degenerate point: {s}"),
            Error::Mismatch(s) => write!(f, "mismatch: {s}"),
            Error::Unclassifiable(s) => write!(f, "cannot classify tail: {s}"),
            Error::NotNonparabolic(s) => write!(f, "end is not p-nonparabolic: {s}"),
            Error::BlowUp(s) => write!(f, "gradient bound lost: {s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
