use thiserror::Error;

/// Errors raised by the homogenizer library.
///
/// The variants map one-to-one onto the process exit codes used by the
/// command-line runner: `Argument` is a usage error, `Resource` a cap
/// violation and `Invariant` an internal consistency breach.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("resource cap exceeded: {what} = {requested} is above the cap of {cap}")]
    Resource {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
