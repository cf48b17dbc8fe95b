use thiserror::Error;

/// Errors raised by the simulator, the cost functions and the optimizers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A circuit or optimizer configuration cannot be used as given.
    #[error("configuration error: {0}")]
    Config(String),
    /// A cost-specific operation was called on a cost of another kind.
    #[error("cost kind mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },
    /// A non-finite value showed up during an update.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::Error::$variant(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
