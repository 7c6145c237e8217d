use std::fmt;
use std::path::Path;

use missreg::ErrorKind;

/// Exit statuses.
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Errors raised by the library.
    Core(missreg::Error),
    /// A file could not be read or parsed.
    UnreadableInput(String),
    /// The chosen method needs an input that was not given.
    MethodRequirementsMissing(String),
    /// Bad or conflicting arguments, including config-file problems.
    Usage {
        code: &'static str,
        msg: String,
    },
    Io(String),
}

impl CliError {
    pub fn usage(code: &'static str, msg: impl Into<String>) -> Self {
        CliError::Usage {
            code,
            msg: msg.into(),
        }
    }

    pub fn io(path: &Path, e: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::UnreadableInput(_) => "UnreadableInput",
            CliError::MethodRequirementsMissing(_) => "MethodRequirementsMissing",
            CliError::Usage { code, .. } => code,
            CliError::Io(_) => "IoError",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Usage => EXIT_USAGE,
                ErrorKind::Data | ErrorKind::Io => EXIT_DATA,
                ErrorKind::Numeric => EXIT_NUMERIC,
            },
            CliError::UnreadableInput(_) | CliError::Io(_) => EXIT_DATA,
            CliError::MethodRequirementsMissing(_) | CliError::Usage { .. } => EXIT_USAGE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::UnreadableInput(m)
            | CliError::MethodRequirementsMissing(m)
            | CliError::Io(m)
            | CliError::Usage { msg: m, .. } => f.write_str(m),
        }
    }
}

impl From<missreg::Error> for CliError {
    fn from(e: missreg::Error) -> Self {
        CliError::Core(e)
    }
}
