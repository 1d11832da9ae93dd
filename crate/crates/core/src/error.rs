use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A size limit was exceeded (enumeration cap, dense spectral cap, register width).
    #[error("capacity exceeded: {what} = {value} is above the cap of {cap}{hint}")]
    Capacity {
        what: &'static str,
        value: usize,
        cap: usize,
        hint: &'static str,
    },
    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed or inconsistent input.
    #[error("invalid input: {0}")]
    Input(String),
    /// Zero-line formula evaluated at a pole (tan phi = 0).
    #[error("pole: {0}")]
    Pole(String),
    /// A verification check did not meet its tolerance.
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn capacity(what: &'static str, value: usize, cap: usize) -> Self {
        Error::Capacity {
            what,
            value,
            cap,
            hint: "",
        }
    }
}
