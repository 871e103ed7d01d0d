use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration, flags or input data.
    #[error("{0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Failure inside the estimation or simulation routines.
    #[error("{0}")]
    Numerical(cksvar::Error),
    /// A re-run did not reproduce the recorded outputs.
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) | CliError::Mismatch(_) => 3,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<cksvar::Error> for CliError {
    fn from(e: cksvar::Error) -> Self {
        use cksvar::Error as E;
        match e {
            E::Data(m) => CliError::Config(format!("invalid data: {m}")),
            E::Parameter(m) => CliError::Config(format!("invalid setting: {m}")),
            E::Unsupported(m) => CliError::Config(format!("unsupported: {m}")),
            E::Misuse(m) => CliError::Config(m),
            E::Dimension(m) => CliError::Config(format!("dimension mismatch: {m}")),
            other => CliError::Numerical(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
