//! Mutual exchange of secrets over the oblivious key exchange.
//!
//! One *key transfer* runs from a sender to a receiver:
//!
//! 1. the sender picks a root `g_s`, a unit exponent `n1` and an exponent `n2`
//!    and sends `a1 = x^(g_s + n1)`, `a2 = x^n2`;
//! 2. the receiver picks a root `g_r` and `n`, replies `b1 = (a1 / x^g_r)^n`
//!    and keeps `K' = a2^n`;
//! 3. the sender computes `K = b1^(n2 / n1)`, which equals `K'` exactly when
//!    `g_s = g_r`;
//! 4. the receiver sends `C = f(M, K')` for a random `M`, the sender answers
//!    `Y = f^-1(C, K)`, and the receiver learns whether it holds `K` by
//!    comparing `Y` with `M`. The sender learns nothing.
//!
//! All exponent arithmetic is done mod `p - 1`; dividing by `n1` means
//! multiplying by its inverse there.
//!
//! [`MutualParty`] runs two transfers back to back (Alice to Bob, then Bob
//! to Alice), then each party sends its secret masked with a claim over the
//! key it *received* (`U = K` if it matched, `!K` otherwise), then both send
//! their secret encrypted under their own outgoing key. A party that walks
//! away after the other has sent its secret only gains something if it
//! matched, in which case its claim was made with the victim's own key and
//! the victim can unmask it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::cipher::{self, context, f_decrypt, f_encrypt, make_claim, mask_secret, SymmetricKey};
use crate::error::ProtocolError;
use crate::numtheory::{is_unit, mod_inv, mod_mul, rand_unit_exponent, BigNat};
use crate::params::{GroupParams, RootChoice};
use crate::session::codec::{CodecError, Frame, PayloadReader, PayloadWriter, ProtocolId};
use crate::session::driver::{AbortReason, ControlMsg, Hello, Role};
use crate::session::{unexpected, Channel, SessionError, Transcript};

/// Length of the random confirmation message `M`.
pub const CONFIRM_LEN: usize = 32;

pub const MSG_OFFER: u8 = 1;
pub const MSG_REPLY: u8 = 2;
pub const MSG_CONFIRM: u8 = 3;
pub const MSG_CONFIRM_REPLY: u8 = 4;
pub const MSG_CLAIM: u8 = 5;
pub const MSG_SECRET: u8 = 6;

/// `x^(g_s + n1)` and `x^n2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Offer {
    pub a1: BigNat,
    pub a2: BigNat,
}

/// `(a1 / x^g_r)^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub b1: BigNat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Confirm {
    pub c: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfirmReply {
    pub y: Vec<u8>,
}

/// A secret masked with the sender's key claim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub masked: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretCt {
    pub ct: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MutualMsg {
    Offer(Offer),
    Reply(Reply),
    Confirm(Confirm),
    ConfirmReply(ConfirmReply),
    Claim(Claim),
    SecretCt(SecretCt),
}

impl Offer {
    pub(crate) fn payload(&self) -> Vec<u8> {
        PayloadWriter::new().nat(&self.a1).nat(&self.a2).finish()
    }

    pub(crate) fn parse(payload: &[u8]) -> Result<Self, CodecError> {
        let mut r = PayloadReader::new(payload);
        let msg = Offer {
            a1: r.nat()?,
            a2: r.nat()?,
        };
        r.finish()?;
        Ok(msg)
    }
}

impl Reply {
    pub(crate) fn payload(&self) -> Vec<u8> {
        PayloadWriter::new().nat(&self.b1).finish()
    }

    pub(crate) fn parse(payload: &[u8]) -> Result<Self, CodecError> {
        let mut r = PayloadReader::new(payload);
        let msg = Reply { b1: r.nat()? };
        r.finish()?;
        Ok(msg)
    }
}

fn bytes_payload(v: &[u8]) -> Vec<u8> {
    PayloadWriter::new().bytes(v).finish()
}

fn parse_bytes(payload: &[u8]) -> Result<Vec<u8>, CodecError> {
    let mut r = PayloadReader::new(payload);
    let v = r.bytes()?;
    r.finish()?;
    Ok(v)
}

impl MutualMsg {
    pub fn to_frame(&self) -> Frame {
        let (t, payload) = match self {
            MutualMsg::Offer(m) => (MSG_OFFER, m.payload()),
            MutualMsg::Reply(m) => (MSG_REPLY, m.payload()),
            MutualMsg::Confirm(m) => (MSG_CONFIRM, bytes_payload(&m.c)),
            MutualMsg::ConfirmReply(m) => (MSG_CONFIRM_REPLY, bytes_payload(&m.y)),
            MutualMsg::Claim(m) => (MSG_CLAIM, bytes_payload(&m.masked)),
            MutualMsg::SecretCt(m) => (MSG_SECRET, bytes_payload(&m.ct)),
        };
        Frame::new(ProtocolId::Mutual, t, payload)
    }

    pub fn from_frame(frame: &Frame) -> Result<Self, ProtocolError> {
        if frame.protocol != ProtocolId::Mutual {
            return Err(unexpected(frame, "mutual"));
        }
        let p = &frame.payload;
        Ok(match frame.msg_type {
            MSG_OFFER => MutualMsg::Offer(Offer::parse(p)?),
            MSG_REPLY => MutualMsg::Reply(Reply::parse(p)?),
            MSG_CONFIRM => MutualMsg::Confirm(Confirm { c: parse_bytes(p)? }),
            MSG_CONFIRM_REPLY => MutualMsg::ConfirmReply(ConfirmReply { y: parse_bytes(p)? }),
            MSG_CLAIM => MutualMsg::Claim(Claim { masked: parse_bytes(p)? }),
            MSG_SECRET => MutualMsg::SecretCt(SecretCt { ct: parse_bytes(p)? }),
            _ => return Err(unexpected(frame, "mutual")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SenderPhase {
    Sent1,
    HaveKey,
    Confirmed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverPhase {
    Sent2,
    Challenged,
    KnowsMatch,
}

/// The sending side of one key transfer (Alice, in the A-to-B direction).
#[derive(Debug, Clone)]
pub struct KeySender {
    params: GroupParams,
    root: RootChoice,
    n1: BigNat,
    n2: BigNat,
    key: Option<SymmetricKey>,
    phase: SenderPhase,
}

impl KeySender {
    /// Sends `x^(g + n1)` and `x^n2`. `n1` must be invertible mod `p - 1`.
    pub fn start(
        params: &GroupParams,
        root: RootChoice,
        n1: BigNat,
        n2: BigNat,
    ) -> Result<(Self, Offer), ProtocolError> {
        let order = params.order();
        if !is_unit(&n1, &order) {
            return Err(ProtocolError::InvalidScalar("n1 must be a unit mod p-1"));
        }
        let a1 = params.pow_x(&((params.root(root) + &n1) % &order));
        let a2 = params.pow_x(&n2);
        let sender = KeySender {
            params: params.clone(),
            root,
            n1,
            n2,
            key: None,
            phase: SenderPhase::Sent1,
        };
        Ok((sender, Offer { a1, a2 }))
    }

    /// `K = b1^(n2 · n1^-1 mod (p - 1))`.
    pub fn compute_key(&mut self, reply: &Reply) -> Result<SymmetricKey, ProtocolError> {
        self.expect(SenderPhase::Sent1, "compute_key")?;
        self.params.check_element(&reply.b1)?;
        let order = self.params.order();
        let exponent = mod_mul(&self.n2, &mod_inv(&self.n1, &order)?, &order);
        let key = SymmetricKey::new(reply.b1.modpow(&exponent, &self.params.p), &self.params)?;
        self.key = Some(key.clone());
        self.phase = SenderPhase::HaveKey;
        Ok(key)
    }

    pub fn confirm_reply(&mut self, msg: &Confirm) -> Result<ConfirmReply, ProtocolError> {
        self.expect(SenderPhase::HaveKey, "confirm_reply")?;
        let reply = confirm_reply(self.key()?, msg);
        self.phase = SenderPhase::Confirmed;
        Ok(reply)
    }

    /// Masks `secret` with a claim over the sender's own key. The sender always
    /// holds its key, so the claim is the matched form.
    pub fn claim(&self, secret: &[u8]) -> Result<Claim, ProtocolError> {
        Ok(claim(secret, self.key()?, true))
    }

    /// Encrypts `secret` under the key this transfer established.
    pub fn seal_secret(&self, secret: &[u8]) -> Result<SecretCt, ProtocolError> {
        Ok(seal_secret(secret, self.key()?))
    }

    pub fn key(&self) -> Result<&SymmetricKey, ProtocolError> {
        self.key.as_ref().ok_or(ProtocolError::WrongPhase {
            operation: "key",
            phase: "Sent1",
        })
    }

    pub fn root(&self) -> RootChoice {
        self.root
    }

    pub fn n1(&self) -> &BigNat {
        &self.n1
    }

    pub fn n2(&self) -> &BigNat {
        &self.n2
    }

    pub fn phase(&self) -> SenderPhase {
        self.phase
    }

    fn expect(&self, phase: SenderPhase, operation: &'static str) -> Result<(), ProtocolError> {
        if self.phase == phase {
            Ok(())
        } else {
            Err(ProtocolError::WrongPhase {
                operation,
                phase: sender_phase_name(self.phase),
            })
        }
    }
}

fn sender_phase_name(p: SenderPhase) -> &'static str {
    match p {
        SenderPhase::Sent1 => "Sent1",
        SenderPhase::HaveKey => "HaveKey",
        SenderPhase::Confirmed => "Confirmed",
    }
}

fn receiver_phase_name(p: ReceiverPhase) -> &'static str {
    match p {
        ReceiverPhase::Sent2 => "Sent2",
        ReceiverPhase::Challenged => "Challenged",
        ReceiverPhase::KnowsMatch => "KnowsMatch",
    }
}

/// The receiving side of one key transfer (Bob, in the A-to-B direction).
#[derive(Debug, Clone)]
pub struct KeyReceiver {
    params: GroupParams,
    root: RootChoice,
    n: BigNat,
    b1: BigNat,
    key: SymmetricKey,
    confirm_msg: Option<Vec<u8>>,
    matched: Option<bool>,
    phase: ReceiverPhase,
}

impl KeyReceiver {
    /// Answers an offer with `b1 = (a1 · (x^g)^-1)^n` and keeps `K' = a2^n`.
    pub fn respond(
        params: &GroupParams,
        offer: &Offer,
        root: RootChoice,
        n: BigNat,
    ) -> Result<(Self, Reply), ProtocolError> {
        params.check_element(&offer.a1)?;
        params.check_element(&offer.a2)?;
        let p = &params.p;
        let x_g_inv = mod_inv(&params.pow_x(params.root(root)), p)?;
        let b1 = mod_mul(&offer.a1, &x_g_inv, p).modpow(&n, p);
        let key = SymmetricKey::new(offer.a2.modpow(&n, p), params)?;
        let receiver = KeyReceiver {
            params: params.clone(),
            root,
            n,
            b1: b1.clone(),
            key,
            confirm_msg: None,
            matched: None,
            phase: ReceiverPhase::Sent2,
        };
        Ok((receiver, Reply { b1 }))
    }

    /// Picks a fresh random `M` and sends `f(M, K')`.
    pub fn challenge<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> Result<Confirm, ProtocolError> {
        self.expect(ReceiverPhase::Sent2, "challenge")?;
        let mut m = vec![0u8; CONFIRM_LEN];
        rng.fill_bytes(&mut m);
        let c = f_encrypt(&m, &self.key, context::CONFIRM);
        self.confirm_msg = Some(m);
        self.phase = ReceiverPhase::Challenged;
        Ok(Confirm { c })
    }

    /// Compares the sender's decryption with `M`.
    pub fn check(&mut self, reply: &ConfirmReply) -> Result<bool, ProtocolError> {
        self.expect(ReceiverPhase::Challenged, "check")?;
        let matched = self.confirm_msg.as_deref() == Some(reply.y.as_slice());
        self.matched = Some(matched);
        self.phase = ReceiverPhase::KnowsMatch;
        Ok(matched)
    }

    /// Masks `secret` with `U = K'` if the transfer matched, `!K'` otherwise.
    pub fn claim(&self, secret: &[u8]) -> Result<Claim, ProtocolError> {
        let matched = self.matched.ok_or(ProtocolError::WrongPhase {
            operation: "claim",
            phase: receiver_phase_name(self.phase),
        })?;
        Ok(claim(secret, &self.key, matched))
    }

    /// `K'`, the receiver's candidate for the sender's key.
    pub fn key(&self) -> &SymmetricKey {
        &self.key
    }

    pub fn b1(&self) -> &BigNat {
        &self.b1
    }

    pub fn root(&self) -> RootChoice {
        self.root
    }

    pub fn n(&self) -> &BigNat {
        &self.n
    }

    pub fn confirm_msg(&self) -> Option<&[u8]> {
        self.confirm_msg.as_deref()
    }

    pub fn matched(&self) -> Option<bool> {
        self.matched
    }

    pub fn phase(&self) -> ReceiverPhase {
        self.phase
    }

    pub fn params(&self) -> &GroupParams {
        &self.params
    }

    fn expect(&self, phase: ReceiverPhase, operation: &'static str) -> Result<(), ProtocolError> {
        if self.phase == phase {
            Ok(())
        } else {
            Err(ProtocolError::WrongPhase {
                operation,
                phase: receiver_phase_name(self.phase),
            })
        }
    }
}

/// `Y = f^-1(C, K)`.
pub fn confirm_reply(key: &SymmetricKey, msg: &Confirm) -> ConfirmReply {
    ConfirmReply {
        y: f_decrypt(&msg.c, key, context::CONFIRM),
    }
}

pub fn claim(secret: &[u8], key: &SymmetricKey, matched: bool) -> Claim {
    Claim {
        masked: mask_secret(secret, &make_claim(key, matched)),
    }
}

pub fn seal_secret(secret: &[u8], key: &SymmetricKey) -> SecretCt {
    SecretCt {
        ct: f_encrypt(secret, key, context::SECRET),
    }
}

pub fn open_secret(ct: &SecretCt, key: &SymmetricKey) -> Vec<u8> {
    f_decrypt(&ct.ct, key, context::SECRET)
}

/// Unmasks a walked-away peer's claim with our own key. Yields the peer's
/// secret exactly when the peer's claim was made over a matching key.
pub fn recover_on_cheat(claim_msg: &Claim, known_key: &SymmetricKey) -> Vec<u8> {
    cipher::mask_secret(&claim_msg.masked, &make_claim(known_key, true))
}

/// One party's secret choices for both transfers of a mutual exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutualChoices {
    /// Root used when this party sends its key.
    pub send_root: RootChoice,
    pub send_n1: BigNat,
    pub send_n2: BigNat,
    /// Root used when this party receives the peer's key.
    pub recv_root: RootChoice,
    pub recv_n: BigNat,
}

impl MutualChoices {
    /// Independent uniform roots; every exponent is a random unit mod `p - 1`.
    pub fn random<R: RngCore + ?Sized>(params: &GroupParams, rng: &mut R) -> Self {
        MutualChoices {
            send_root: RootChoice::random(rng),
            send_n1: rand_unit_exponent(&params.p, rng),
            send_n2: rand_unit_exponent(&params.p, rng),
            recv_root: RootChoice::random(rng),
            recv_n: rand_unit_exponent(&params.p, rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Alice,
    Bob,
}

/// What a party ends up knowing about the peer's secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PeerSecret {
    /// The peer's key arrived and its ciphertext opened.
    Received(Vec<u8>),
    /// The transfer did not match; the ciphertext is unreadable.
    NotReceived,
    /// The peer walked away; this is its claim unmasked with our own key.
    Recovered(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutualOutcome {
    pub side: Side,
    /// Whether this party received the peer's key.
    pub matched: bool,
    pub peer_secret: PeerSecret,
    /// Key this party sent.
    pub own_key: SymmetricKey,
    /// This party's candidate for the peer's key.
    pub received_key: SymmetricKey,
    pub withdrew: bool,
}

impl MutualOutcome {
    pub fn got_peer_secret(&self) -> bool {
        matches!(self.peer_secret, PeerSecret::Received(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    AwaitOffer,
    AwaitReply,
    AwaitConfirm,
    AwaitConfirmReply,
    AwaitClaim,
    AwaitSecret,
    Done,
}

impl Stage {
    fn name(self) -> &'static str {
        match self {
            Stage::AwaitOffer => "awaiting offer",
            Stage::AwaitReply => "awaiting reply",
            Stage::AwaitConfirm => "awaiting confirm",
            Stage::AwaitConfirmReply => "awaiting confirm reply",
            Stage::AwaitClaim => "awaiting claim",
            Stage::AwaitSecret => "awaiting secret",
            Stage::Done => "done",
        }
    }
}

/// One party of the full bidirectional exchange, as a session role.
///
/// Message order: the Alice-to-Bob transfer through confirmation, then the
/// Bob-to-Alice transfer, then Alice's claim, Bob's claim, Alice's
/// ciphertext, Bob's ciphertext.
#[derive(Debug)]
pub struct MutualParty {
    params: GroupParams,
    side: Side,
    choices: MutualChoices,
    secret: Vec<u8>,
    rng: ChaCha20Rng,
    stage: Stage,
    sender: Option<KeySender>,
    receiver: Option<KeyReceiver>,
    peer_claim: Option<Claim>,
    peer_secret: Option<PeerSecret>,
    withdraw: bool,
}

impl MutualParty {
    /// `seed` drives the confirmation messages only; the choices are explicit.
    pub fn new(params: &GroupParams, side: Side, choices: MutualChoices, secret: Vec<u8>, seed: u64) -> Self {
        MutualParty {
            params: params.clone(),
            side,
            choices,
            secret,
            rng: ChaCha20Rng::seed_from_u64(seed),
            stage: match side {
                Side::Alice => Stage::AwaitReply,
                Side::Bob => Stage::AwaitOffer,
            },
            sender: None,
            receiver: None,
            peer_claim: None,
            peer_secret: None,
            withdraw: false,
        }
    }

    /// Random choices and confirmation messages, all derived from `seed`.
    pub fn random(params: &GroupParams, side: Side, secret: Vec<u8>, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let choices = MutualChoices::random(params, &mut rng);
        Self::new(params, side, choices, secret, rng.next_u64())
    }

    /// Walk away instead of sending our own ciphertext once the peer's has
    /// arrived (Bob) or once the peer's claim has arrived (Alice).
    pub fn withdraw_before_final(mut self) -> Self {
        self.withdraw = true;
        self
    }

    fn start_sender(&mut self) -> Result<Frame, ProtocolError> {
        let (sender, offer) = KeySender::start(
            &self.params,
            self.choices.send_root,
            self.choices.send_n1.clone(),
            self.choices.send_n2.clone(),
        )?;
        self.sender = Some(sender);
        Ok(MutualMsg::Offer(offer).to_frame())
    }

    fn sender_mut(&mut self) -> Result<&mut KeySender, ProtocolError> {
        let phase = self.stage.name();
        self.sender.as_mut().ok_or(ProtocolError::WrongPhase {
            operation: "sender step",
            phase,
        })
    }

    fn receiver_ref(&self) -> Result<&KeyReceiver, ProtocolError> {
        self.receiver.as_ref().ok_or(ProtocolError::WrongPhase {
            operation: "receiver step",
            phase: self.stage.name(),
        })
    }

    fn own_claim(&self) -> Result<Frame, ProtocolError> {
        Ok(MutualMsg::Claim(self.receiver_ref()?.claim(&self.secret)?).to_frame())
    }

    fn own_ciphertext(&self) -> Result<Frame, ProtocolError> {
        let sender = self.sender.as_ref().ok_or(ProtocolError::WrongPhase {
            operation: "seal",
            phase: self.stage.name(),
        })?;
        Ok(MutualMsg::SecretCt(sender.seal_secret(&self.secret)?).to_frame())
    }

    fn withdraw_frame(&mut self) -> Frame {
        self.stage = Stage::Done;
        ControlMsg::Abort(AbortReason::Withdrawn).to_frame()
    }
}

impl Role for MutualParty {
    type Output = MutualOutcome;

    fn hello(&self) -> Hello {
        Hello {
            protocol: ProtocolId::Mutual,
            params_digest: self.params.digest(),
            binding: 0,
            rounds: 0,
        }
    }

    fn is_initiator(&self) -> bool {
        self.side == Side::Alice
    }

    fn start(&mut self) -> Result<Vec<Frame>, ProtocolError> {
        match self.side {
            Side::Alice => Ok(vec![self.start_sender()?]),
            Side::Bob => Ok(vec![]),
        }
    }

    fn handle(&mut self, frame: &Frame) -> Result<Vec<Frame>, ProtocolError> {
        let msg = MutualMsg::from_frame(frame)?;
        let side = self.side;
        let out = match (self.stage, msg) {
            (Stage::AwaitOffer, MutualMsg::Offer(offer)) => {
                let (mut receiver, reply) =
                    KeyReceiver::respond(&self.params, &offer, self.choices.recv_root, self.choices.recv_n.clone())?;
                let confirm = receiver.challenge(&mut self.rng)?;
                self.receiver = Some(receiver);
                self.stage = Stage::AwaitConfirmReply;
                vec![MutualMsg::Reply(reply).to_frame(), MutualMsg::Confirm(confirm).to_frame()]
            }
            (Stage::AwaitConfirmReply, MutualMsg::ConfirmReply(reply)) => {
                let receiver = self.receiver.as_mut().ok_or(ProtocolError::WrongPhase {
                    operation: "check",
                    phase: "awaiting confirm reply",
                })?;
                receiver.check(&reply)?;
                match side {
                    Side::Alice => {
                        self.stage = Stage::AwaitClaim;
                        vec![self.own_claim()?]
                    }
                    Side::Bob => {
                        self.stage = Stage::AwaitReply;
                        vec![self.start_sender()?]
                    }
                }
            }
            (Stage::AwaitReply, MutualMsg::Reply(reply)) => {
                self.sender_mut()?.compute_key(&reply)?;
                self.stage = Stage::AwaitConfirm;
                vec![]
            }
            (Stage::AwaitConfirm, MutualMsg::Confirm(confirm)) => {
                let answer = self.sender_mut()?.confirm_reply(&confirm)?;
                self.stage = match side {
                    Side::Alice => Stage::AwaitOffer,
                    Side::Bob => Stage::AwaitClaim,
                };
                vec![MutualMsg::ConfirmReply(answer).to_frame()]
            }
            (Stage::AwaitClaim, MutualMsg::Claim(claim)) => {
                self.peer_claim = Some(claim);
                match side {
                    Side::Alice if self.withdraw => vec![self.withdraw_frame()],
                    Side::Alice => {
                        self.stage = Stage::AwaitSecret;
                        vec![self.own_ciphertext()?]
                    }
                    Side::Bob => {
                        self.stage = Stage::AwaitSecret;
                        vec![self.own_claim()?]
                    }
                }
            }
            (Stage::AwaitSecret, MutualMsg::SecretCt(ct)) => {
                let receiver = self.receiver_ref()?;
                self.peer_secret = Some(if receiver.matched() == Some(true) {
                    PeerSecret::Received(open_secret(&ct, receiver.key()))
                } else {
                    PeerSecret::NotReceived
                });
                match side {
                    Side::Bob if self.withdraw => vec![self.withdraw_frame()],
                    Side::Bob => {
                        let out = vec![self.own_ciphertext()?];
                        self.stage = Stage::Done;
                        out
                    }
                    Side::Alice => {
                        self.stage = Stage::Done;
                        vec![]
                    }
                }
            }
            (stage, _) => return Err(unexpected(frame, stage.name())),
        };
        Ok(out)
    }

    fn is_done(&self) -> bool {
        self.stage == Stage::Done
    }

    fn on_peer_abort(&mut self) {
        if self.stage != Stage::AwaitSecret {
            return;
        }
        let (Some(claim), Some(sender)) = (&self.peer_claim, &self.sender) else {
            return;
        };
        if let Ok(key) = sender.key() {
            self.peer_secret = Some(PeerSecret::Recovered(recover_on_cheat(claim, key)));
            self.stage = Stage::Done;
        }
    }

    fn into_output(self) -> Result<MutualOutcome, ProtocolError> {
        let incomplete = ProtocolError::WrongPhase {
            operation: "into_output",
            phase: self.stage.name(),
        };
        let (Some(sender), Some(receiver)) = (&self.sender, &self.receiver) else {
            return Err(incomplete);
        };
        Ok(MutualOutcome {
            side: self.side,
            matched: receiver.matched() == Some(true),
            peer_secret: self.peer_secret.clone().ok_or(incomplete)?,
            own_key: sender.key()?.clone(),
            received_key: receiver.key().clone(),
            withdrew: self.withdraw,
        })
    }
}

/// Result of [`run_mutual`].
#[derive(Debug)]
pub struct SessionOutcome {
    pub alice: Result<MutualOutcome, SessionError>,
    pub bob: Result<MutualOutcome, SessionError>,
    pub alice_transcript: Transcript,
    pub bob_transcript: Transcript,
}

impl SessionOutcome {
    pub fn alice_got_sb(&self) -> bool {
        matches!(&self.alice, Ok(o) if o.got_peer_secret())
    }

    pub fn bob_got_sa(&self) -> bool {
        matches!(&self.bob, Ok(o) if o.got_peer_secret())
    }
}

/// Runs both parties on their own threads, connected by `channels`.
pub fn run_mutual<CA, CB>(alice: MutualParty, bob: MutualParty, channels: (CA, CB)) -> SessionOutcome
where
    CA: Channel + Send + 'static,
    CB: Channel + Send + 'static,
{
    let (mut ca, mut cb) = channels;
    let bob_thread = std::thread::spawn(move || {
        let mut transcript = Transcript::new();
        let result = crate::session::drive_session(bob, &mut cb, &mut transcript);
        cb.close();
        (result, transcript)
    });
    let mut alice_transcript = Transcript::new();
    let alice_result = crate::session::drive_session(alice, &mut ca, &mut alice_transcript);
    ca.close();
    let (bob_result, bob_transcript) = bob_thread.join().expect("bob thread panicked");
    SessionOutcome {
        alice: alice_result,
        bob: bob_result,
        alice_transcript,
        bob_transcript,
    }
}
