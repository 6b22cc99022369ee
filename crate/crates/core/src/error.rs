use alloc::string::String;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The call itself is malformed (mismatched lengths, too few radii, ...).
    #[error("usage error: {0}")]
    Usage(String),
    /// The input is valid but outside the supported regime (overlapping IFS).
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// The requested problem exceeds the memory guard.
    #[error("size error: {0}")]
    Size(String),
    /// An iterative routine failed to produce a certified answer.
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

impl Error {
    /// Short machine-readable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Usage(_) => "usage",
            Error::Unsupported(_) => "unsupported",
            Error::Size(_) => "size",
            Error::NoConvergence(_) => "no_convergence",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
