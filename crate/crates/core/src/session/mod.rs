//! Framing, channels, transcripts and the session driver.

pub mod channel;
pub mod codec;
pub mod driver;
pub mod transcript;

pub use channel::{memory_channel_pair, Channel, MemoryChannel, SocketChannel, SocketListener, TransportError};
pub use codec::{decode_frame, encode_frame, CodecError, Frame, ProtocolId, MAX_FRAME_LEN};
pub use driver::{drive_pair, drive_session, AbortReason, ControlMsg, Hello, PairOutcome, Role, SessionError};
pub use transcript::{Direction, Transcript, TranscriptEntry};

use crate::error::ProtocolError;

/// Error for a frame that does not fit the receiving role's current phase.
pub(crate) fn unexpected(frame: &Frame, phase: &'static str) -> ProtocolError {
    ProtocolError::UnexpectedMessage {
        protocol: frame.protocol as u8,
        msg_type: frame.msg_type,
        phase,
    }
}
