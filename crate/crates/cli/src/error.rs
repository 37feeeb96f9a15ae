use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] modelclass::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub type CliResult<T> = Result<T, CliError>;

/// Process exit status for each error class.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const BAD_INPUT: u8 = 3;
    pub const IO: u8 = 4;
    pub const CONFIG: u8 = 5;
    pub const NUMERICAL: u8 = 6;
    pub const SEARCH: u8 = 7;
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use modelclass::Error as E;
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io { .. } => exit::IO,
            CliError::Core(e) => match e {
                E::ConstantColumn(_)
                | E::NonFinite
                | E::InvalidInput(_)
                | E::DimensionMismatch { .. }
                | E::Csv(_) => exit::BAD_INPUT,
                E::Io(_) => exit::IO,
                E::InvalidConfig(_) | E::BudgetExceeded { .. } => exit::CONFIG,
                E::SingularGram { .. } | E::FoldTooSmall { .. } | E::DegenerateFit { .. } => {
                    exit::NUMERICAL
                }
                E::EmptySupports
                | E::ZeroGammaInState(_)
                | E::NoCandidates
                | E::EmptySize(_)
                | E::MissingSize(_) => exit::SEARCH,
            },
        }
    }
}
