use alloc::string::String;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A requested size or depth exceeds what the artifact can hold.
    #[error("resource limit: {0}")]
    Resource(String),
    /// A norm or method whose definition is not implemented for these arguments.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => { $crate::Error::InvalidInput(alloc::format!($($arg)*)) };
}
macro_rules! resource {
    ($($arg:tt)*) => { $crate::Error::Resource(alloc::format!($($arg)*)) };
}
macro_rules! unsupported {
    ($($arg:tt)*) => { $crate::Error::Unsupported(alloc::format!($($arg)*)) };
}
pub(crate) use {invalid, resource, unsupported};
