use alloc::string::String;

/// Failure categories shared by every module of the core.
///
/// The variants line up with how a caller should react: usage errors are
/// caller mistakes, data errors come from input content, training errors
/// mean the data cannot support a model, numeric errors mean an optimizer
/// produced non-finite values.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("training error: {0}")]
    Training(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("unknown term: {0:?}")]
    Lookup(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($variant:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$variant(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;

impl Error {
    /// The message without the category prefix.
    pub fn message(&self) -> &str {
        match self {
            Error::Usage(m)
            | Error::Config(m)
            | Error::Data(m)
            | Error::Training(m)
            | Error::Numeric(m)
            | Error::Lookup(m) => m,
        }
    }
}
