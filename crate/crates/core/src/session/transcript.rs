use std::fmt;

use thiserror::Error;

use super::codec::{Frame, ProtocolId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Sent,
    Received,
}

impl Direction {
    fn as_str(self) -> &'static str {
        match self {
            Direction::Sent => "sent",
            Direction::Received => "recv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub seq: u64,
    pub direction: Direction,
    pub frame: Frame,
}

/// Append-only record of every frame one endpoint sent or received.
///
/// Text form is one line per entry, `seq dir protocol msg_type payload-hex`,
/// with `-` standing for an empty payload.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("transcript line {line}: {reason}")]
pub struct TranscriptParseError {
    pub line: usize,
    pub reason: &'static str,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, direction: Direction, frame: Frame) -> u64 {
        let seq = self.entries.len() as u64;
        self.entries.push(TranscriptEntry {
            seq,
            direction,
            frame,
        });
        seq
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn frames(&self, direction: Direction) -> impl Iterator<Item = &Frame> {
        self.entries
            .iter()
            .filter(move |e| e.direction == direction)
            .map(|e| &e.frame)
    }

    /// The first frame of the given kind seen in `direction`.
    pub fn find(&self, direction: Direction, protocol: ProtocolId, msg_type: u8) -> Option<&Frame> {
        self.frames(direction)
            .find(|f| f.protocol == protocol && f.msg_type == msg_type)
    }

    /// True when an abort control frame was sent or received.
    pub fn is_aborted(&self) -> bool {
        self.entries.iter().any(|e| {
            e.frame.protocol == ProtocolId::Control && e.frame.msg_type == super::driver::CONTROL_ABORT
        })
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Self, TranscriptParseError> {
        let mut out = Transcript::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |reason| TranscriptParseError { line, reason };
            if raw.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = raw.split_whitespace().collect();
            let [seq, dir, protocol, msg_type, payload] = fields[..] else {
                return Err(err("expected 5 fields"));
            };
            let seq: u64 = seq.parse().map_err(|_| err("bad sequence number"))?;
            if seq != out.entries.len() as u64 {
                return Err(err("sequence numbers must count up from 0"));
            }
            let direction = match dir {
                "sent" => Direction::Sent,
                "recv" => Direction::Received,
                _ => return Err(err("direction must be sent or recv")),
            };
            let protocol: u8 = protocol.parse().map_err(|_| err("bad protocol id"))?;
            let protocol = ProtocolId::try_from(protocol).map_err(|_| err("unknown protocol id"))?;
            let msg_type: u8 = msg_type.parse().map_err(|_| err("bad message type"))?;
            let payload = if payload == "-" {
                Vec::new()
            } else {
                hex::decode(payload).map_err(|_| err("bad payload hex"))?
            };
            out.record(direction, Frame::new(protocol, msg_type, payload));
        }
        Ok(out)
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let payload = if e.frame.payload.is_empty() {
                "-".to_string()
            } else {
                hex::encode(&e.frame.payload)
            };
            writeln!(
                f,
                "{} {} {} {} {}",
                e.seq,
                e.direction.as_str(),
                e.frame.protocol as u8,
                e.frame.msg_type,
                payload
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_and_text_round_trip() {
        let mut t = Transcript::new();
        assert_eq!(t.record(Direction::Sent, Frame::new(ProtocolId::Mutual, 1, vec![0, 1, 0x10])), 0);
        assert_eq!(t.record(Direction::Received, Frame::new(ProtocolId::Control, 2, vec![])), 1);
        let text = t.to_text();
        assert_eq!(text, "0 sent 1 1 000110\n1 recv 0 2 -\n");
        assert_eq!(Transcript::from_text(&text).unwrap(), t);
        assert!(t.is_aborted());
        assert!(t.find(Direction::Sent, ProtocolId::Mutual, 1).is_some());
        assert!(t.find(Direction::Received, ProtocolId::Mutual, 1).is_none());
    }

    #[test]
    fn bad_text() {
        assert_eq!(Transcript::from_text("1 sent 1 1 -\n").unwrap_err().line, 1);
        assert!(Transcript::from_text("0 up 1 1 -\n").is_err());
        assert!(Transcript::from_text("0 sent 1 1 zz\n").is_err());
        assert!(Transcript::from_text("0 sent 7 1 -\n").is_err());
    }
}
