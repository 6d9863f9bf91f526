//! Binary frame codec.
//!
//! ```text
//! +-------------+-------------+----------+-----------------+
//! | length (4B) | protocol 1B | type 1B  | payload         |
//! | u32 BE      |             |          | length - 2 B    |
//! +-------------+-------------+----------+-----------------+
//! ```
//!
//! Inside payloads, naturals are a `u16` BE byte count followed by the
//! big-endian magnitude with no leading zero bytes (zero is count 0), and
//! byte strings are a `u32` BE length followed by the bytes.

use thiserror::Error;

use crate::numtheory::BigNat;

/// Largest accepted value of the length field.
pub const MAX_FRAME_LEN: u32 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ProtocolId {
    Control = 0,
    Mutual = 1,
    Ot12 = 2,
    CoinFlip = 3,
    Zkp = 4,
}

impl TryFrom<u8> for ProtocolId {
    type Error = CodecError;

    fn try_from(v: u8) -> Result<Self, CodecError> {
        Ok(match v {
            0 => ProtocolId::Control,
            1 => ProtocolId::Mutual,
            2 => ProtocolId::Ot12,
            3 => ProtocolId::CoinFlip,
            4 => ProtocolId::Zkp,
            other => return Err(CodecError::UnknownProtocol(other)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    pub protocol: ProtocolId,
    pub msg_type: u8,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(protocol: ProtocolId, msg_type: u8, payload: Vec<u8>) -> Self {
        Frame {
            protocol,
            msg_type,
            payload,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("need {0} more bytes")]
    NeedMoreBytes(usize),
    #[error("frame length {0} exceeds the {MAX_FRAME_LEN} byte cap")]
    Oversize(u64),
    #[error("frame length {0} is shorter than the 2-byte header")]
    TooShort(u32),
    #[error("unknown protocol id {0}")]
    UnknownProtocol(u8),
    #[error("payload truncated while reading {0}")]
    Truncated(&'static str),
    #[error("{0} unexpected trailing payload bytes")]
    TrailingBytes(usize),
    #[error("integer encoding has a leading zero byte")]
    NonCanonical,
    #[error("invalid {0} value {1}")]
    InvalidValue(&'static str, u64),
}

pub fn encode_frame(frame: &Frame) -> Result<Vec<u8>, CodecError> {
    let len = frame.payload.len() as u64 + 2;
    if len > MAX_FRAME_LEN as u64 {
        return Err(CodecError::Oversize(len));
    }
    let mut out = Vec::with_capacity(len as usize + 4);
    out.extend_from_slice(&(len as u32).to_be_bytes());
    out.push(frame.protocol as u8);
    out.push(frame.msg_type);
    out.extend_from_slice(&frame.payload);
    Ok(out)
}

/// Validates a length prefix before anything is buffered for it.
pub fn check_length(len: u32) -> Result<(), CodecError> {
    if len > MAX_FRAME_LEN {
        Err(CodecError::Oversize(len as u64))
    } else if len < 2 {
        Err(CodecError::TooShort(len))
    } else {
        Ok(())
    }
}

/// Decodes one frame from the front of `buf`, returning it and the bytes consumed.
pub fn decode_frame(buf: &[u8]) -> Result<(Frame, usize), CodecError> {
    if buf.len() < 4 {
        return Err(CodecError::NeedMoreBytes(4 - buf.len()));
    }
    let len = u32::from_be_bytes([buf[0], buf[1], buf[2], buf[3]]);
    check_length(len)?;
    let total = 4 + len as usize;
    if buf.len() < total {
        return Err(CodecError::NeedMoreBytes(total - buf.len()));
    }
    let protocol = ProtocolId::try_from(buf[4])?;
    let frame = Frame {
        protocol,
        msg_type: buf[5],
        payload: buf[6..total].to_vec(),
    };
    Ok((frame, total))
}

#[derive(Debug, Default)]
pub struct PayloadWriter {
    buf: Vec<u8>,
}

impl PayloadWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// # Panics
    /// If the magnitude is longer than `u16::MAX` bytes.
    pub fn nat(mut self, v: &BigNat) -> Self {
        let bytes = if v == &BigNat::ZERO {
            Vec::new()
        } else {
            v.to_bytes_be()
        };
        let count = u16::try_from(bytes.len()).expect("integer too large for frame encoding");
        self.buf.extend_from_slice(&count.to_be_bytes());
        self.buf.extend_from_slice(&bytes);
        self
    }

    pub fn bytes(mut self, v: &[u8]) -> Self {
        self.buf.extend_from_slice(&(v.len() as u32).to_be_bytes());
        self.buf.extend_from_slice(v);
        self
    }

    pub fn u8(mut self, v: u8) -> Self {
        self.buf.push(v);
        self
    }

    pub fn u32(mut self, v: u32) -> Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct PayloadReader<'a> {
    buf: &'a [u8],
}

impl<'a> PayloadReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        PayloadReader { buf }
    }

    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], CodecError> {
        if self.buf.len() < n {
            return Err(CodecError::Truncated(what));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub fn nat(&mut self) -> Result<BigNat, CodecError> {
        let count = self.take(2, "integer length")?;
        let count = u16::from_be_bytes([count[0], count[1]]) as usize;
        let bytes = self.take(count, "integer")?;
        if bytes.first() == Some(&0) {
            return Err(CodecError::NonCanonical);
        }
        Ok(BigNat::from_bytes_be(bytes))
    }

    pub fn bytes(&mut self) -> Result<Vec<u8>, CodecError> {
        let len = self.u32()? as usize;
        Ok(self.take(len, "byte string")?.to_vec())
    }

    pub fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1, "u8")?[0])
    }

    pub fn u32(&mut self) -> Result<u32, CodecError> {
        let b = self.take(4, "u32")?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    pub fn finish(self) -> Result<(), CodecError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(CodecError::TrailingBytes(self.buf.len()))
        }
    }
}
