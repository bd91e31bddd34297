//! Error-to-exit-code mapping: 1 usage, 2 parse, 3 numerical failure.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<spin_toolkit::Error> for CliError {
    fn from(e: spin_toolkit::Error) -> Self {
        use spin_toolkit::Error as E;
        match &e {
            E::EigenNoConvergence { .. } | E::FitNoConvergence { .. } | E::SingularMatrix => {
                CliError::Numeric(e.to_string())
            }
            E::NoAddressableTransitions => CliError::Numeric(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
