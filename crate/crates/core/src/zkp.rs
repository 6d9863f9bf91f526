//! Zero-knowledge identification by discrete log.
//!
//! The prover knows `e` with `y = x^e mod p`. Each round:
//!
//! 1. the prover picks a unit `n` and commits `X = y^n`;
//! 2. the verifier flips a bit `b`; for `b = 1` it also picks `m` and sends `M = x^m`;
//! 3. the prover answers `n` (for `b = 0`) or `Y = M^e` (for `b = 1`);
//! 4. the verifier checks `y^n = X` or `y^m = Y`.
//!
//! Someone without `e` passes `b = 0` rounds and fails `b = 1` rounds except
//! with probability `1 / (p - 1)`, so `t` rounds let an imposter through with
//! probability about `2^-t`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::ProtocolError;
use crate::numtheory::{rand_below, rand_unit_exponent, BigNat};
use crate::params::GroupParams;
use crate::session::codec::{CodecError, Frame, PayloadReader, PayloadWriter, ProtocolId};
use crate::session::driver::{Hello, Role};
use crate::session::unexpected;

pub const MSG_COMMIT: u8 = 1;
pub const MSG_CHALLENGE_ZERO: u8 = 2;
pub const MSG_CHALLENGE_ONE: u8 = 3;
pub const MSG_RESPONSE_N: u8 = 4;
pub const MSG_RESPONSE_Y: u8 = 5;
pub const MSG_VERDICT: u8 = 6;

/// The public statement `y = x^e mod p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZkPublic {
    pub p: BigNat,
    pub x: BigNat,
    pub y: BigNat,
}

impl ZkPublic {
    pub fn new(params: &GroupParams, y: BigNat) -> Result<Self, ProtocolError> {
        params.check_element(&y)?;
        Ok(ZkPublic {
            p: params.p.clone(),
            x: params.x.clone(),
            y,
        })
    }

    /// The statement for a known exponent.
    pub fn for_secret(params: &GroupParams, e: &BigNat) -> Self {
        ZkPublic {
            p: params.p.clone(),
            x: params.x.clone(),
            y: params.pow_x(e),
        }
    }

    fn is_element(&self, v: &BigNat) -> bool {
        *v >= BigNat::from(1u8) && *v < self.p
    }
}

/// Exponent in `[1, p - 2]` derived from a password.
pub fn secret_from_password(params: &GroupParams, password: &str) -> BigNat {
    let digest = Sha256::digest(password.as_bytes());
    let modulus = &params.p - 2u8;
    BigNat::from_bytes_be(&digest) % modulus + 1u8
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Challenge {
    Zero,
    One { m_pub: BigNat },
}

impl Challenge {
    pub fn bit(&self) -> u8 {
        match self {
            Challenge::Zero => 0,
            Challenge::One { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    N(BigNat),
    Y(BigNat),
}

/// Picks a uniform unit `n` and commits `X = y^n`.
pub fn prover_commit<R: RngCore + ?Sized>(public: &ZkPublic, rng: &mut R) -> (BigNat, BigNat) {
    let n = rand_unit_exponent(&public.p, rng);
    let commitment = public.y.modpow(&n, &public.p);
    (n, commitment)
}

/// Uniform bit; for `b = 1` a uniform `m` in `[1, p - 2]` and `M = x^m`.
/// Returns the verifier's secret `m` alongside the challenge.
pub fn verifier_challenge<R: RngCore + ?Sized>(public: &ZkPublic, rng: &mut R) -> (Option<BigNat>, Challenge) {
    if rng.gen::<bool>() {
        let m = rand_below(&(&public.p - 2u8), rng) + 1u8;
        let m_pub = public.x.modpow(&m, &public.p);
        (Some(m), Challenge::One { m_pub })
    } else {
        (None, Challenge::Zero)
    }
}

pub fn prover_respond(public: &ZkPublic, e: &BigNat, n: &BigNat, challenge: &Challenge) -> Response {
    match challenge {
        Challenge::Zero => Response::N(n.clone()),
        Challenge::One { m_pub } => Response::Y(m_pub.modpow(e, &public.p)),
    }
}

/// `b = 0`: accept iff `y^n = X`. `b = 1`: accept iff `y^m = Y`.
pub fn verifier_check(
    public: &ZkPublic,
    commitment: &BigNat,
    m: Option<&BigNat>,
    challenge: &Challenge,
    response: &Response,
) -> bool {
    match (challenge, response, m) {
        (Challenge::Zero, Response::N(n), _) => public.y.modpow(n, &public.p) == *commitment,
        (Challenge::One { .. }, Response::Y(y_resp), Some(m)) => public.y.modpow(m, &public.p) == *y_resp,
        _ => false,
    }
}

/// A `b = 0` transcript `(X, n)` produced without `e`.
pub fn simulate_zero_round<R: RngCore + ?Sized>(public: &ZkPublic, rng: &mut R) -> (BigNat, BigNat) {
    let n = rand_unit_exponent(&public.p, rng);
    (public.y.modpow(&n, &public.p), n)
}

pub trait ProverStrategy {
    fn commit(&mut self, public: &ZkPublic, rng: &mut dyn RngCore) -> BigNat;
    fn respond(&mut self, public: &ZkPublic, challenge: &Challenge, rng: &mut dyn RngCore) -> Response;
}

/// Knows `e`.
#[derive(Debug, Clone)]
pub struct HonestProver {
    e: BigNat,
    n: BigNat,
}

impl HonestProver {
    pub fn new(e: BigNat) -> Self {
        HonestProver { e, n: BigNat::default() }
    }
}

impl ProverStrategy for HonestProver {
    fn commit(&mut self, public: &ZkPublic, rng: &mut dyn RngCore) -> BigNat {
        let (n, commitment) = prover_commit(public, rng);
        self.n = n;
        commitment
    }

    fn respond(&mut self, public: &ZkPublic, challenge: &Challenge, _rng: &mut dyn RngCore) -> Response {
        prover_respond(public, &self.e, &self.n, challenge)
    }
}

/// Does not know `e`: commits honestly, guesses a uniform element for `b = 1`.
#[derive(Debug, Clone, Default)]
pub struct ImposterProver {
    n: BigNat,
}

impl ImposterProver {
    pub fn new() -> Self {
        Self::default()
    }
}

impl ProverStrategy for ImposterProver {
    fn commit(&mut self, public: &ZkPublic, rng: &mut dyn RngCore) -> BigNat {
        let (n, commitment) = prover_commit(public, rng);
        self.n = n;
        commitment
    }

    fn respond(&mut self, public: &ZkPublic, challenge: &Challenge, rng: &mut dyn RngCore) -> Response {
        match challenge {
            Challenge::Zero => Response::N(self.n.clone()),
            Challenge::One { .. } => Response::Y(rand_below(&(&public.p - 1u8), rng) + 1u8),
        }
    }
}

/// One round with prover and verifier sharing `rng`.
pub fn run_round<S: ProverStrategy + ?Sized>(strategy: &mut S, public: &ZkPublic, rng: &mut dyn RngCore) -> bool {
    let commitment = strategy.commit(public, rng);
    let (m, challenge) = verifier_challenge(public, rng);
    let response = strategy.respond(public, &challenge, rng);
    verifier_check(public, &commitment, m.as_ref(), &challenge, &response)
}

/// Accepts iff all `t` rounds accept; stops at the first rejection.
pub fn run_protocol<S: ProverStrategy + ?Sized>(
    strategy: &mut S,
    public: &ZkPublic,
    t: u32,
    rng: &mut dyn RngCore,
) -> bool {
    (0..t).all(|_| run_round(strategy, public, rng))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZkMsg {
    Commit { x: BigNat },
    ChallengeZero,
    ChallengeOne { m_pub: BigNat },
    ResponseN { n: BigNat },
    ResponseY { y: BigNat },
    Verdict(Verdict),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Rejected,
    Accepted,
    /// Round passed; the prover commits again.
    Continue,
}

impl Verdict {
    fn code(self) -> u8 {
        match self {
            Verdict::Rejected => 0,
            Verdict::Accepted => 1,
            Verdict::Continue => 2,
        }
    }

    fn from_code(code: u8) -> Result<Self, CodecError> {
        match code {
            0 => Ok(Verdict::Rejected),
            1 => Ok(Verdict::Accepted),
            2 => Ok(Verdict::Continue),
            c => Err(CodecError::InvalidValue("verdict", c as u64)),
        }
    }
}

impl ZkMsg {
    pub fn to_frame(&self) -> Frame {
        let w = PayloadWriter::new();
        let (t, payload) = match self {
            ZkMsg::Commit { x } => (MSG_COMMIT, w.nat(x).finish()),
            ZkMsg::ChallengeZero => (MSG_CHALLENGE_ZERO, w.finish()),
            ZkMsg::ChallengeOne { m_pub } => (MSG_CHALLENGE_ONE, w.nat(m_pub).finish()),
            ZkMsg::ResponseN { n } => (MSG_RESPONSE_N, w.nat(n).finish()),
            ZkMsg::ResponseY { y } => (MSG_RESPONSE_Y, w.nat(y).finish()),
            ZkMsg::Verdict(v) => (MSG_VERDICT, w.u8(v.code()).finish()),
        };
        Frame::new(ProtocolId::Zkp, t, payload)
    }

    pub fn from_frame(frame: &Frame) -> Result<Self, ProtocolError> {
        if frame.protocol != ProtocolId::Zkp {
            return Err(unexpected(frame, "zkp"));
        }
        let mut r = PayloadReader::new(&frame.payload);
        let msg = match frame.msg_type {
            MSG_COMMIT => ZkMsg::Commit { x: r.nat()? },
            MSG_CHALLENGE_ZERO => ZkMsg::ChallengeZero,
            MSG_CHALLENGE_ONE => ZkMsg::ChallengeOne { m_pub: r.nat()? },
            MSG_RESPONSE_N => ZkMsg::ResponseN { n: r.nat()? },
            MSG_RESPONSE_Y => ZkMsg::ResponseY { y: r.nat()? },
            MSG_VERDICT => ZkMsg::Verdict(Verdict::from_code(r.u8()?)?),
            _ => return Err(unexpected(frame, "zkp")),
        };
        r.finish()?;
        Ok(msg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZkOutcome {
    pub accepted: bool,
    /// Rounds completed, including a rejecting one.
    pub rounds: u32,
}

fn hello(params: &GroupParams, public: &ZkPublic, t: u32) -> Hello {
    let mut h = Sha256::new();
    h.update(params.digest());
    h.update(public.y.to_bytes_be());
    Hello {
        protocol: ProtocolId::Zkp,
        params_digest: h.finalize().into(),
        binding: 0,
        rounds: t,
    }
}

/// The prover as a session role; initiates.
pub struct ProverRole {
    params: GroupParams,
    public: ZkPublic,
    strategy: Box<dyn ProverStrategy + Send>,
    rng: ChaCha20Rng,
    t: u32,
    rounds: u32,
    awaiting: ProverWait,
    outcome: Option<ZkOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ProverWait {
    Challenge,
    Verdict,
}

impl ProverRole {
    pub fn new(params: &GroupParams, public: ZkPublic, strategy: Box<dyn ProverStrategy + Send>, t: u32, seed: u64) -> Self {
        ProverRole {
            params: params.clone(),
            public,
            strategy,
            rng: ChaCha20Rng::seed_from_u64(seed),
            t,
            rounds: 0,
            awaiting: ProverWait::Challenge,
            outcome: None,
        }
    }

    fn commit(&mut self) -> Frame {
        self.awaiting = ProverWait::Challenge;
        ZkMsg::Commit {
            x: self.strategy.commit(&self.public, &mut self.rng),
        }
        .to_frame()
    }
}

impl Role for ProverRole {
    type Output = ZkOutcome;

    fn hello(&self) -> Hello {
        hello(&self.params, &self.public, self.t)
    }

    fn is_initiator(&self) -> bool {
        true
    }

    fn start(&mut self) -> Result<Vec<Frame>, ProtocolError> {
        if self.t == 0 {
            self.outcome = Some(ZkOutcome { accepted: true, rounds: 0 });
            return Ok(vec![]);
        }
        Ok(vec![self.commit()])
    }

    fn handle(&mut self, frame: &Frame) -> Result<Vec<Frame>, ProtocolError> {
        let msg = ZkMsg::from_frame(frame)?;
        let challenge = match (self.awaiting, msg) {
            (ProverWait::Challenge, ZkMsg::ChallengeZero) => Challenge::Zero,
            (ProverWait::Challenge, ZkMsg::ChallengeOne { m_pub }) if self.public.is_element(&m_pub) => {
                Challenge::One { m_pub }
            }
            (ProverWait::Challenge, ZkMsg::ChallengeOne { m_pub }) => {
                return Err(ProtocolError::MalformedElement(m_pub))
            }
            (ProverWait::Verdict, ZkMsg::Verdict(v)) if self.outcome.is_none() => {
                self.rounds += 1;
                return Ok(match v {
                    Verdict::Continue if self.rounds < self.t => vec![self.commit()],
                    Verdict::Continue => return Err(unexpected(frame, "after last round")),
                    Verdict::Accepted | Verdict::Rejected => {
                        self.outcome = Some(ZkOutcome {
                            accepted: v == Verdict::Accepted,
                            rounds: self.rounds,
                        });
                        vec![]
                    }
                });
            }
            _ => return Err(unexpected(frame, "zkp prover")),
        };
        let response = match self.strategy.respond(&self.public, &challenge, &mut self.rng) {
            Response::N(n) => ZkMsg::ResponseN { n },
            Response::Y(y) => ZkMsg::ResponseY { y },
        };
        self.awaiting = ProverWait::Verdict;
        Ok(vec![response.to_frame()])
    }

    fn is_done(&self) -> bool {
        self.outcome.is_some()
    }

    fn into_output(self) -> Result<ZkOutcome, ProtocolError> {
        self.outcome.ok_or(ProtocolError::WrongPhase {
            operation: "into_output",
            phase: "undecided",
        })
    }
}

/// The verifier as a session role.
pub struct VerifierRole {
    params: GroupParams,
    public: ZkPublic,
    rng: ChaCha20Rng,
    t: u32,
    rounds: u32,
    pending: Option<(BigNat, Option<BigNat>, Challenge)>,
    outcome: Option<ZkOutcome>,
}

impl VerifierRole {
    pub fn new(params: &GroupParams, public: ZkPublic, t: u32, seed: u64) -> Self {
        VerifierRole {
            params: params.clone(),
            public,
            rng: ChaCha20Rng::seed_from_u64(seed),
            t,
            rounds: 0,
            pending: None,
            outcome: (t == 0).then_some(ZkOutcome { accepted: true, rounds: 0 }),
        }
    }
}

impl Role for VerifierRole {
    type Output = ZkOutcome;

    fn hello(&self) -> Hello {
        hello(&self.params, &self.public, self.t)
    }

    fn is_initiator(&self) -> bool {
        false
    }

    fn start(&mut self) -> Result<Vec<Frame>, ProtocolError> {
        Ok(vec![])
    }

    fn handle(&mut self, frame: &Frame) -> Result<Vec<Frame>, ProtocolError> {
        let msg = ZkMsg::from_frame(frame)?;
        match (self.pending.take(), msg) {
            (None, ZkMsg::Commit { x }) => {
                if !self.public.is_element(&x) {
                    return Err(ProtocolError::MalformedElement(x));
                }
                let (m, challenge) = verifier_challenge(&self.public, &mut self.rng);
                let out = match &challenge {
                    Challenge::Zero => ZkMsg::ChallengeZero,
                    Challenge::One { m_pub } => ZkMsg::ChallengeOne { m_pub: m_pub.clone() },
                };
                self.pending = Some((x, m, challenge));
                Ok(vec![out.to_frame()])
            }
            (Some((x, m, challenge)), reply @ (ZkMsg::ResponseN { .. } | ZkMsg::ResponseY { .. })) => {
                let response = match reply {
                    ZkMsg::ResponseN { n } => Response::N(n),
                    ZkMsg::ResponseY { y } => Response::Y(y),
                    _ => unreachable!("matched above"),
                };
                let ok = verifier_check(&self.public, &x, m.as_ref(), &challenge, &response);
                self.rounds += 1;
                let verdict = match (ok, self.rounds >= self.t) {
                    (false, _) => Verdict::Rejected,
                    (true, true) => Verdict::Accepted,
                    (true, false) => Verdict::Continue,
                };
                if verdict != Verdict::Continue {
                    self.outcome = Some(ZkOutcome {
                        accepted: ok,
                        rounds: self.rounds,
                    });
                }
                Ok(vec![ZkMsg::Verdict(verdict).to_frame()])
            }
            _ => Err(unexpected(frame, "zkp verifier")),
        }
    }

    fn is_done(&self) -> bool {
        self.outcome.is_some()
    }

    fn into_output(self) -> Result<ZkOutcome, ProtocolError> {
        self.outcome.ok_or(ProtocolError::WrongPhase {
            operation: "into_output",
            phase: "undecided",
        })
    }
}
