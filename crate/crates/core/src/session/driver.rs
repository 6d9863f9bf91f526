//! Pumps role state machines over channels.
//!
//! Every session opens with a control hello from the initiating role,
//! carrying the protocol id, a digest of the public parameters, the
//! 1-out-of-2 key binding and the round count. The responder compares it
//! with its own expectation before running its first step.

use std::collections::VecDeque;

use thiserror::Error;

use super::channel::{Channel, TransportError};
use super::codec::{decode_frame, encode_frame, CodecError, Frame, PayloadReader, PayloadWriter, ProtocolId};
use super::transcript::{Direction, Transcript};
use crate::error::ProtocolError;

pub const CONTROL_HELLO: u8 = 1;
pub const CONTROL_ABORT: u8 = 2;

/// Key binding announced in an oblivious-transfer hello: K1 goes with g1.
pub const BINDING_K1_G1: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hello {
    pub protocol: ProtocolId,
    pub params_digest: [u8; 32],
    pub binding: u8,
    pub rounds: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbortReason {
    ProtocolViolation,
    TransportFailure,
    /// The party walked away on purpose.
    Withdrawn,
    HelloMismatch,
    Other(u8),
}

impl AbortReason {
    pub fn code(self) -> u8 {
        match self {
            AbortReason::ProtocolViolation => 1,
            AbortReason::TransportFailure => 2,
            AbortReason::Withdrawn => 3,
            AbortReason::HelloMismatch => 4,
            AbortReason::Other(c) => c,
        }
    }

    pub fn from_code(code: u8) -> Self {
        match code {
            1 => AbortReason::ProtocolViolation,
            2 => AbortReason::TransportFailure,
            3 => AbortReason::Withdrawn,
            4 => AbortReason::HelloMismatch,
            c => AbortReason::Other(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ControlMsg {
    Hello(Hello),
    Abort(AbortReason),
}

impl ControlMsg {
    pub fn to_frame(&self) -> Frame {
        match self {
            ControlMsg::Hello(h) => Frame::new(
                ProtocolId::Control,
                CONTROL_HELLO,
                PayloadWriter::new()
                    .u8(h.protocol as u8)
                    .bytes(&h.params_digest)
                    .u8(h.binding)
                    .u32(h.rounds)
                    .finish(),
            ),
            ControlMsg::Abort(reason) => Frame::new(
                ProtocolId::Control,
                CONTROL_ABORT,
                PayloadWriter::new().u8(reason.code()).finish(),
            ),
        }
    }

    pub fn from_frame(frame: &Frame) -> Result<Self, ProtocolError> {
        let mut r = PayloadReader::new(&frame.payload);
        let msg = match (frame.protocol, frame.msg_type) {
            (ProtocolId::Control, CONTROL_HELLO) => {
                let protocol = ProtocolId::try_from(r.u8()?)?;
                let digest = r.bytes()?;
                let params_digest: [u8; 32] = digest
                    .as_slice()
                    .try_into()
                    .map_err(|_| CodecError::InvalidValue("digest length", digest.len() as u64))?;
                ControlMsg::Hello(Hello {
                    protocol,
                    params_digest,
                    binding: r.u8()?,
                    rounds: r.u32()?,
                })
            }
            (ProtocolId::Control, CONTROL_ABORT) => ControlMsg::Abort(AbortReason::from_code(r.u8()?)),
            (p, t) => {
                return Err(ProtocolError::UnexpectedMessage {
                    protocol: p as u8,
                    msg_type: t,
                    phase: "control",
                })
            }
        };
        r.finish()?;
        Ok(msg)
    }
}

/// One side of a two-party protocol, advanced one incoming frame at a time.
pub trait Role {
    type Output;

    fn hello(&self) -> Hello;

    /// The initiator sends the hello and speaks first.
    fn is_initiator(&self) -> bool;

    /// Frames to send once the session is open.
    fn start(&mut self) -> Result<Vec<Frame>, ProtocolError>;

    fn handle(&mut self, frame: &Frame) -> Result<Vec<Frame>, ProtocolError>;

    fn is_done(&self) -> bool;

    /// Called when the peer aborts or disappears. A role that can still
    /// produce a result (cheat recovery, for one) moves to done here.
    fn on_peer_abort(&mut self) {}

    fn into_output(self) -> Result<Self::Output, ProtocolError>;
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("protocol violation: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("transport failure: {0}")]
    Transport(#[from] TransportError),
    #[error("peer aborted the session ({0:?})")]
    PeerAborted(AbortReason),
}

enum Stop {
    Local(ProtocolError),
    Transport(TransportError),
    PeerAbort(AbortReason),
}

impl From<ProtocolError> for Stop {
    fn from(e: ProtocolError) -> Self {
        Stop::Local(e)
    }
}

impl From<TransportError> for Stop {
    fn from(e: TransportError) -> Self {
        Stop::Transport(e)
    }
}

struct Endpoint<R: Role> {
    role: R,
    hello: Hello,
    awaiting_hello: bool,
}

impl<R: Role> Endpoint<R> {
    fn new(role: R) -> Self {
        let hello = role.hello();
        let awaiting_hello = !role.is_initiator();
        Endpoint {
            role,
            hello,
            awaiting_hello,
        }
    }

    fn emit(frames: Vec<Frame>, transcript: &mut Transcript) -> Vec<Frame> {
        for f in &frames {
            transcript.record(Direction::Sent, f.clone());
        }
        frames
    }

    fn start(&mut self, transcript: &mut Transcript) -> Result<Vec<Frame>, Stop> {
        if self.awaiting_hello {
            return Ok(Vec::new());
        }
        let mut out = vec![ControlMsg::Hello(self.hello.clone()).to_frame()];
        out.extend(self.role.start()?);
        Ok(Self::emit(out, transcript))
    }

    fn on_frame(&mut self, frame: Frame, transcript: &mut Transcript) -> Result<Vec<Frame>, Stop> {
        transcript.record(Direction::Received, frame.clone());
        let out = if frame.protocol == ProtocolId::Control {
            match ControlMsg::from_frame(&frame)? {
                ControlMsg::Abort(reason) => {
                    self.role.on_peer_abort();
                    if self.role.is_done() {
                        return Ok(Vec::new());
                    }
                    return Err(Stop::PeerAbort(reason));
                }
                ControlMsg::Hello(hello) => {
                    if !self.awaiting_hello {
                        return Err(Stop::Local(ProtocolError::UnexpectedMessage {
                            protocol: 0,
                            msg_type: CONTROL_HELLO,
                            phase: "running",
                        }));
                    }
                    if hello != self.hello {
                        return Err(Stop::Local(ProtocolError::HelloMismatch));
                    }
                    self.awaiting_hello = false;
                    self.role.start()?
                }
            }
        } else if self.awaiting_hello {
            return Err(Stop::Local(ProtocolError::UnexpectedMessage {
                protocol: frame.protocol as u8,
                msg_type: frame.msg_type,
                phase: "awaiting hello",
            }));
        } else {
            self.role.handle(&frame)?
        };
        Ok(Self::emit(out, transcript))
    }

    fn is_done(&self) -> bool {
        !self.awaiting_hello && self.role.is_done()
    }

    /// Records our own abort frame, returning it for delivery, and the error to report.
    fn fail(mut self, stop: Stop, transcript: &mut Transcript) -> (Option<Frame>, Result<R::Output, SessionError>) {
        match stop {
            Stop::Local(e) => {
                let reason = if e == ProtocolError::HelloMismatch {
                    AbortReason::HelloMismatch
                } else {
                    AbortReason::ProtocolViolation
                };
                let abort = ControlMsg::Abort(reason).to_frame();
                transcript.record(Direction::Sent, abort.clone());
                (Some(abort), Err(SessionError::Protocol(e)))
            }
            Stop::PeerAbort(reason) => (None, Err(SessionError::PeerAborted(reason))),
            Stop::Transport(e) => {
                transcript.record(Direction::Sent, ControlMsg::Abort(AbortReason::TransportFailure).to_frame());
                self.role.on_peer_abort();
                if self.role.is_done() {
                    (None, self.role.into_output().map_err(SessionError::from))
                } else {
                    (None, Err(SessionError::Transport(e)))
                }
            }
        }
    }
}

/// Runs one role to completion over `channel`, recording every frame.
///
/// Protocol violations are answered with an abort frame before returning.
pub fn drive_session<R, C>(role: R, channel: &mut C, transcript: &mut Transcript) -> Result<R::Output, SessionError>
where
    R: Role,
    C: Channel + ?Sized,
{
    let mut ep = Endpoint::new(role);
    let run = (|| -> Result<(), Stop> {
        for f in ep.start(transcript)? {
            channel.send(&f)?;
        }
        while !ep.is_done() {
            let frame = channel.receive()?;
            for f in ep.on_frame(frame, transcript)? {
                channel.send(&f)?;
            }
        }
        Ok(())
    })();
    match run {
        Ok(()) => ep.role.into_output().map_err(SessionError::from),
        Err(stop) => {
            let (abort, result) = ep.fail(stop, transcript);
            if let Some(frame) = abort {
                let _ = channel.send(&frame);
            }
            result
        }
    }
}

/// Outcome of [`drive_pair`].
#[derive(Debug)]
pub struct PairOutcome<A, B> {
    pub first: Result<A, SessionError>,
    pub second: Result<B, SessionError>,
    pub first_transcript: Transcript,
    pub second_transcript: Transcript,
}

enum Side<R: Role> {
    Running(Endpoint<R>),
    Finished(Result<R::Output, SessionError>),
}

struct Party<R: Role> {
    side: Side<R>,
    transcript: Transcript,
    inbox: VecDeque<Vec<u8>>,
}

impl<R: Role> Party<R> {
    fn new(role: R) -> Self {
        Party {
            side: Side::Running(Endpoint::new(role)),
            transcript: Transcript::new(),
            inbox: VecDeque::new(),
        }
    }

    fn running(&self) -> bool {
        matches!(self.side, Side::Running(_))
    }

    fn finish_with(&mut self, stop: Option<Stop>, outbox: &mut VecDeque<Vec<u8>>) {
        let Side::Running(ep) = std::mem::replace(&mut self.side, Side::Finished(Err(SessionError::PeerAborted(AbortReason::Other(0))))) else {
            return;
        };
        let result = match stop {
            None => ep.role.into_output().map_err(SessionError::from),
            Some(stop) => {
                let (abort, result) = ep.fail(stop, &mut self.transcript);
                if let Some(frame) = abort {
                    outbox.push_back(encode_frame(&frame).expect("abort frame fits"));
                }
                result
            }
        };
        self.side = Side::Finished(result);
    }

    fn deliver(&mut self, frames: Result<Vec<Frame>, Stop>, outbox: &mut VecDeque<Vec<u8>>) {
        match frames {
            Ok(frames) => {
                for f in frames {
                    match encode_frame(&f) {
                        Ok(bytes) => outbox.push_back(bytes),
                        Err(e) => return self.finish_with(Some(Stop::Transport(e.into())), outbox),
                    }
                }
                if matches!(&self.side, Side::Running(ep) if ep.is_done()) {
                    self.finish_with(None, outbox);
                }
            }
            Err(stop) => self.finish_with(Some(stop), outbox),
        }
    }

    fn start(&mut self, outbox: &mut VecDeque<Vec<u8>>) {
        if let Side::Running(ep) = &mut self.side {
            let frames = ep.start(&mut self.transcript);
            self.deliver(frames, outbox);
        }
    }

    /// Processes one queued frame; false when there was nothing to do.
    fn step(&mut self, outbox: &mut VecDeque<Vec<u8>>) -> bool {
        let Side::Running(ep) = &mut self.side else {
            return false;
        };
        let Some(bytes) = self.inbox.pop_front() else {
            return false;
        };
        let frames = match decode_frame(&bytes) {
            Ok((frame, _)) => ep.on_frame(frame, &mut self.transcript),
            Err(e) => Err(Stop::Transport(e.into())),
        };
        self.deliver(frames, outbox);
        true
    }

    fn into_result(self) -> (Result<R::Output, SessionError>, Transcript) {
        match self.side {
            Side::Finished(r) => (r, self.transcript),
            Side::Running(_) => unreachable!("party still running"),
        }
    }
}

/// Runs two roles against each other in the calling thread.
///
/// Frames are passed through the codec exactly as on a real channel, so
/// transcripts match what [`drive_session`] would record.
pub fn drive_pair<A: Role, B: Role>(first: A, second: B) -> PairOutcome<A::Output, B::Output> {
    let mut a = Party::new(first);
    let mut b = Party::new(second);
    a.start(&mut b.inbox);
    b.start(&mut a.inbox);

    while a.running() || b.running() {
        let progressed = a.step(&mut b.inbox) | b.step(&mut a.inbox);
        if progressed {
            continue;
        }
        // Nobody can move: whoever is still waiting sees the channel close.
        let closed = || Some(Stop::Transport(TransportError::PeerClosed { partial_frame: false }));
        if a.running() {
            a.finish_with(closed(), &mut VecDeque::new());
        }
        if b.running() {
            b.finish_with(closed(), &mut VecDeque::new());
        }
    }

    let (first, first_transcript) = a.into_result();
    let (second, second_transcript) = b.into_result();
    PairOutcome {
        first,
        second,
        first_transcript,
        second_transcript,
    }
}
