use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] subexit_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 when too many trajectories were
    /// censored.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(subexit_core::Error::Censored { .. }) => 3,
            _ => 2,
        }
    }
}

pub(crate) fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
