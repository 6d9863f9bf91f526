use dhot_core::session::{AbortReason, SessionError};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_TRANSPORT: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("{0}")]
    Violation(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Violation(_) => EXIT_VIOLATION,
            CliError::Io(_) => EXIT_CONFIG,
            CliError::Session(e) => match e {
                SessionError::Protocol(_) => EXIT_VIOLATION,
                SessionError::Transport(_) => EXIT_TRANSPORT,
                SessionError::PeerAborted(AbortReason::TransportFailure) => EXIT_TRANSPORT,
                SessionError::PeerAborted(_) => EXIT_VIOLATION,
            },
        }
    }
}
