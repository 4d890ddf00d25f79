//! Config parsing, report writers and the three commands behind the
//! `frsr` binary.

pub mod commands;
pub mod config;
pub mod report;

pub use config::RunConfig;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const NO_ROOT: i32 = 2;
    pub const INVARIANT: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] frsr::Error),
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => exit::CONFIG,
            CliError::Core(e) if e.is_no_root() => exit::NO_ROOT,
            CliError::Core(frsr::Error::Invalid(_)) => exit::CONFIG,
            CliError::Core(_) | CliError::Internal(_) => exit::INVARIANT,
        }
    }
}
