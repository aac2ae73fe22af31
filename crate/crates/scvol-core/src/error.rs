//! Error type shared by every module.

use alloc::string::String;
use core::fmt;

/// Failure modes of geometry computations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    Domain(String),
    /// A documented precondition of the operation does not hold.
    Precondition(String),
    /// A size or memory budget would be exceeded.
    Resource(String),
    /// An iterative numeric procedure failed to converge or lost validity.
    Numeric(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition error: {msg}"),
            Error::Resource(msg) => write!(f, "resource error: {msg}"),
            Error::Numeric(msg) => write!(f, "numeric error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! err_ctor {
    ($fn_name:ident, $variant:ident) => {
        impl Error {
            pub fn $fn_name(msg: impl fmt::Display) -> Self {
                Error::$variant(alloc::format!("{msg}"))
            }
        }
    };
}

err_ctor!(domain, Domain);
err_ctor!(precondition, Precondition);
err_ctor!(resource, Resource);
err_ctor!(numeric, Numeric);
