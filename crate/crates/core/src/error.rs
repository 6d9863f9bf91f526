use thiserror::Error;

use crate::numtheory::{BigNat, NumberError};
use crate::session::codec::CodecError;

/// Failure of a protocol step. Any of these aborts the session.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("invalid scalar: {0}")]
    InvalidScalar(&'static str),
    #[error("group element {0} outside [1, p-1]")]
    MalformedElement(BigNat),
    #[error("{operation} not allowed in phase {phase}")]
    WrongPhase {
        operation: &'static str,
        phase: &'static str,
    },
    #[error("unexpected message type {msg_type} for protocol {protocol} in phase {phase}")]
    UnexpectedMessage {
        protocol: u8,
        msg_type: u8,
        phase: &'static str,
    },
    #[error("session hello does not match local configuration")]
    HelloMismatch,
    #[error("transcript is missing the {0} frame")]
    IncompleteTranscript(&'static str),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Number(#[from] NumberError),
}
