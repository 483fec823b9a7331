use std::fmt;
use std::path::PathBuf;

use omega_core::Error as CoreError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_PARSE: u8 = 3;
pub const EXIT_UNDEFINED: u8 = 4;
pub const EXIT_NUMERIC: u8 = 5;
pub const EXIT_IO: u8 = 6;
pub const EXIT_INFEASIBLE: u8 = 7;

/// Bad or missing command-line input. `flag` names the offending option.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError {
    pub flag: Option<String>,
    pub message: String,
}

impl UsageError {
    pub fn flag(flag: &str, message: impl Into<String>) -> Self {
        Self { flag: Some(flag.to_string()), message: message.into() }
    }

    pub fn general(message: impl Into<String>) -> Self {
        Self { flag: None, message: message.into() }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.flag {
            Some(flag) => write!(f, "{flag}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Malformed input file, with 1-based position where known.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub path: PathBuf,
    pub line: Option<u64>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.path.display())?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
        }
        if let Some(column) = self.column {
            write!(f, ":{column}")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(UsageError),
    Parse(ParseError),
    Core(CoreError),
    Io(std::io::Error),
}

impl CliError {
    /// Each error class has exactly one exit status.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Io(_) => EXIT_IO,
            CliError::Core(e) => match e {
                CoreError::Undefined { .. } => EXIT_UNDEFINED,
                CoreError::EmptyFeasibleSet(_) | CoreError::InfeasibleTarget(_) => EXIT_INFEASIBLE,
                CoreError::QuadratureFailure(_)
                | CoreError::NoRadialSampler(_)
                | CoreError::SingularAtZero
                | CoreError::DegenerateScale(_) => EXIT_NUMERIC,
                CoreError::NonNormalizable(_)
                | CoreError::InvalidGenerator(_)
                | CoreError::InvalidModel(_)
                | CoreError::RankDeficient { .. }
                | CoreError::DimensionMismatch { .. }
                | CoreError::GeneratorMismatch(_)
                | CoreError::InvalidArgument(_) => EXIT_USAGE,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "usage error: {e}"),
            CliError::Parse(e) => write!(f, "parse error: {e}"),
            CliError::Core(CoreError::Undefined { tail_index }) => write!(
                f,
                "omega ratio undefined: tail index {tail_index:?} <= 1 (both integrals need a tail index α > 1)"
            ),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e)
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
