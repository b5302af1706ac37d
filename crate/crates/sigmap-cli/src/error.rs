use std::fmt;

/// Top-level failure classes, one per reserved exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or config (exit 2).
    Usage(String),
    /// File-system or format trouble (exit 3).
    Io(String),
    /// Numerical failure inside the pipeline (exit 4).
    Numeric(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<sigmap_core::Error> for CliError {
    fn from(e: sigmap_core::Error) -> Self {
        match e {
            sigmap_core::Error::InvalidParameter(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
