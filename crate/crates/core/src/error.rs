use alloc::string::String;
use core::fmt;

/// Coarse error classification, used by callers to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The caller supplied something malformed or infeasible.
    Input,
    /// The inputs were well formed but the statistic is undefined on them.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two things that must agree in length or dimensionality do not.
    Shape { expected: usize, found: usize, what: &'static str },
    /// A kernel or config is not usable as given.
    Config(String),
    /// An index points outside the data.
    Index { index: usize, len: usize },
    /// A class (or cluster) has too few members for the unbiased estimator.
    InsufficientSamples { class: usize, size: usize },
    /// Infeasible or invalid input values.
    Input(String),
    /// The data admits no well-defined answer (zero variance, all clusters singleton, ...).
    Degenerate(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InsufficientSamples { .. } | Error::Degenerate(_) => ErrorKind::Degenerate,
            _ => ErrorKind::Input,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape { expected, found, what } => {
                write!(f, "shape mismatch in {what}: expected {expected}, found {found}")
            }
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Index { index, len } => write!(f, "index {index} out of range for {len} rows"),
            Error::InsufficientSamples { class, size } => write!(
                f,
                "insufficient samples: class {class} has {size} member(s), at least 2 required"
            ),
            Error::Input(msg) => write!(f, "input error: {msg}"),
            Error::Degenerate(msg) => write!(f, "degenerate data: {msg}"),
        }
    }
}

#[cfg(any(test, feature = "std"))]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
