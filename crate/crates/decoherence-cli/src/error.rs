use std::fmt;

/// Failure classes, each mapped to one process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config or out-of-domain input.
    Validation(String),
    /// A quadrature or solver did not reach its tolerance.
    Numerical(String),
    /// `verify` found rows outside tolerance.
    Breach(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Breach(_) => 4,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Breach(n) => write!(f, "{n} regression row(s) outside tolerance"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<decoherence::Error> for CliError {
    fn from(e: decoherence::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
