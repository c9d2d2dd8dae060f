use thiserror::Error;

use crate::actor::ActorId;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Protocol(#[from] brasp_core::Error),
    #[error("protocol order violation: {0}")]
    Order(String),
    #[error("{actor} cannot handle {message} from {from}")]
    Unexpected {
        actor: ActorId,
        from: ActorId,
        message: &'static str,
    },
    #[error("key containment violated: {0}")]
    KeyLeak(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("state file version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("state file is corrupt: {0}")]
    Corrupt(&'static str),
    #[error("invalid input: {0}")]
    Input(String),
}

impl SimError {
    /// Process exit code: 2 for protocol failures, 3 for I/O and input.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Protocol(_)
            | SimError::Order(_)
            | SimError::Unexpected { .. }
            | SimError::KeyLeak(_) => 2,
            SimError::Io(_)
            | SimError::Json(_)
            | SimError::Version { .. }
            | SimError::Corrupt(_)
            | SimError::Input(_) => 3,
        }
    }
}

pub type SimResult<T> = Result<T, SimError>;
