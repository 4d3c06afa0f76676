use thiserror::Error;

/// Errors surfaced by the library.
///
/// `Internal` and `EnergyTie` indicate broken invariants rather than bad
/// input; the CLI maps them to a distinct exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("inconsistent active set: {0}")]
    Inconsistent(String),

    #[error("no dominant power exists: {0}")]
    NoDominantPower(String),

    #[error("instance too large for brute force: {0}")]
    SizeBound(String),

    #[error("energy tie in brute force enumeration: {0}")]
    EnergyTie(String),

    #[error("value not representable: {0}")]
    Numeric(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input (file contents, arguments,
    /// violated preconditions the caller controls), false for broken
    /// internal invariants.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Internal(_) | Error::EnergyTie(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
