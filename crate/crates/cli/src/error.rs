use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed config: {0}")]
    Config(String),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error(transparent)]
    Core(#[from] rvlab::Error),
}

impl CliError {
    /// 2 for malformed input or broken invariants, 1 for numerical failure.
    pub fn exit_code(&self) -> u8 {
        use rvlab::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(..) => 2,
            CliError::Core(e) => match e {
                E::Structural(_) | E::Mesh(_) | E::Degenerate(_) | E::Domain(_) | E::MuTooLarge { .. } | E::Metric(_) => 2,
                _ => 1,
            },
        }
    }
}
