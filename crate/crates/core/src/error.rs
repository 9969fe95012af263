use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("player count {0} out of range 1..={max}", max = crate::MAX_PLAYERS)]
    Dimension(usize),

    #[error("{what} limited to d <= {max}, got d = {d}")]
    ComplexityGuard {
        what: &'static str,
        d: usize,
        max: usize,
    },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("value {value} of coalition {coalition} is not positive; use the extended proportional values")]
    Positivity { coalition: String, value: f64 },

    #[error("degenerate game: {0}")]
    Degenerate(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("value table is missing coalitions: {}", .0.join(", "))]
    MissingCoalitions(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse error classes, also used as process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage = 1,
    Degenerate = 2,
    Numerical = 3,
}

impl Error {
    pub fn contract(msg: impl fmt::Display) -> Self {
        Error::Contract(msg.to_string())
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Degenerate(_) => ErrorClass::Degenerate,
            Error::Positivity { .. } | Error::LinearAlgebra(_) => ErrorClass::Numerical,
            _ => ErrorClass::Usage,
        }
    }
}
