use std::fmt;
use std::path::{Path, PathBuf};

/// Failure of one CLI run, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flag combination or value.
    Usage(String),
    Core(tabxai::Error),
    Io { path: PathBuf, source: std::io::Error },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// 2 usage, 3 input documents, 4 numeric or fit failure.
    pub fn exit_code(&self) -> u8 {
        use tabxai::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Core(e) => match e {
                E::Config(_) => 2,
                E::Split(_) | E::Fold(_) => 3,
                e if e.is_input_error() => 3,
                _ => 4,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "i/o error on {}: {source}", path.display()),
        }
    }
}

impl From<tabxai::Error> for CliError {
    fn from(e: tabxai::Error) -> Self {
        CliError::Core(e)
    }
}
