use thiserror::Error;

/// CLI failures, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config keys or parameter ranges (exit 2).
    #[error("{0}")]
    Usage(String),
    /// Numerical or I/O failure while running (exit 3).
    #[error("{0:#}")]
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<gaugelab::Error> for CliError {
    fn from(e: gaugelab::Error) -> Self {
        match e {
            gaugelab::Error::InvalidParameter(_) | gaugelab::Error::Unsupported(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Runtime(other.into()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}
