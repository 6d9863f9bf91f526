//! One-out-of-two oblivious transfer.
//!
//! Alice holds `S1` under `K1` and `S2` under `K2`; `K1` is bound to `g1` and
//! `K2` to `g2`. Bob picks a root and ends up with exactly the key bound to it.
//!
//! * Alice sends `a = x^(g1 + nA1)`.
//! * Bob sends `b1 = (a / x^gB)^(nB · nB1)` and `b2 = x^nB`.
//! * Alice sends `m = b1^nA2`; Bob computes `K_B = m^(1 / nB1)`.
//! * Alice computes `K1 = b2^(nA1 · nA2)` and `K2 = b2^((g1 - g2 + nA1) · nA2)`
//!   and sends both secrets encrypted.
//!
//! The choice is not hidden from Alice: with unit exponents `b1` is a
//! quadratic non-residue exactly when Bob chose `g1`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::cipher::{context, f_decrypt, f_encrypt, SymmetricKey};
use crate::error::ProtocolError;
use crate::numtheory::{is_unit, mod_inv, mod_mul, mod_sub, rand_unit_exponent, BigNat};
use crate::params::{GroupParams, RootChoice};
use crate::session::codec::{Frame, PayloadReader, PayloadWriter, ProtocolId};
use crate::session::driver::{Hello, Role, BINDING_K1_G1};
use crate::session::unexpected;

pub const MSG_OT1: u8 = 1;
pub const MSG_OT2: u8 = 2;
pub const MSG_OT3: u8 = 3;
pub const MSG_OT_CTS: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OtMsg {
    Ot1 { a: BigNat },
    Ot2 { b1: BigNat, b2: BigNat },
    Ot3 { m: BigNat },
    OtCts { ct1: Vec<u8>, ct2: Vec<u8> },
}

impl OtMsg {
    pub fn to_frame(&self) -> Frame {
        let w = PayloadWriter::new();
        let (t, payload) = match self {
            OtMsg::Ot1 { a } => (MSG_OT1, w.nat(a).finish()),
            OtMsg::Ot2 { b1, b2 } => (MSG_OT2, w.nat(b1).nat(b2).finish()),
            OtMsg::Ot3 { m } => (MSG_OT3, w.nat(m).finish()),
            OtMsg::OtCts { ct1, ct2 } => (MSG_OT_CTS, w.bytes(ct1).bytes(ct2).finish()),
        };
        Frame::new(ProtocolId::Ot12, t, payload)
    }

    pub fn from_frame(frame: &Frame) -> Result<Self, ProtocolError> {
        if frame.protocol != ProtocolId::Ot12 {
            return Err(unexpected(frame, "ot12"));
        }
        let mut r = PayloadReader::new(&frame.payload);
        let msg = match frame.msg_type {
            MSG_OT1 => OtMsg::Ot1 { a: r.nat()? },
            MSG_OT2 => OtMsg::Ot2 {
                b1: r.nat()?,
                b2: r.nat()?,
            },
            MSG_OT3 => OtMsg::Ot3 { m: r.nat()? },
            MSG_OT_CTS => OtMsg::OtCts {
                ct1: r.bytes()?,
                ct2: r.bytes()?,
            },
            _ => return Err(unexpected(frame, "ot12")),
        };
        r.finish()?;
        Ok(msg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlicePhase {
    Sent1,
    Sent3,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BobPhase {
    Sent2,
    HaveKey,
    Done,
}

impl AlicePhase {
    fn name(self) -> &'static str {
        match self {
            AlicePhase::Sent1 => "Sent1",
            AlicePhase::Sent3 => "Sent3",
            AlicePhase::Done => "Done",
        }
    }
}

impl BobPhase {
    fn name(self) -> &'static str {
        match self {
            BobPhase::Sent2 => "Sent2",
            BobPhase::HaveKey => "HaveKey",
            BobPhase::Done => "Done",
        }
    }
}

fn wrong_phase(operation: &'static str, phase: &'static str) -> ProtocolError {
    ProtocolError::WrongPhase { operation, phase }
}

/// Alice's side: the holder of both secrets.
#[derive(Debug, Clone)]
pub struct AliceOtState {
    params: GroupParams,
    n_a1: BigNat,
    n_a2: Option<BigNat>,
    b2: Option<BigNat>,
    phase: AlicePhase,
}

impl AliceOtState {
    /// `a = x^(g1 + nA1)`; always `g1`, whatever Bob will choose.
    pub fn round1(params: &GroupParams, n_a1: BigNat) -> Result<(Self, BigNat), ProtocolError> {
        let order = params.order();
        if !is_unit(&n_a1, &order) {
            return Err(ProtocolError::InvalidScalar("nA1 must be a unit mod p-1"));
        }
        let a = params.pow_x(&((&params.g1 + &n_a1) % &order));
        let state = AliceOtState {
            params: params.clone(),
            n_a1,
            n_a2: None,
            b2: None,
            phase: AlicePhase::Sent1,
        };
        Ok((state, a))
    }

    /// `m = b1^nA2`; keeps `b2` for the key computation.
    pub fn round3(&mut self, b1: &BigNat, b2: &BigNat, n_a2: BigNat) -> Result<BigNat, ProtocolError> {
        if self.phase != AlicePhase::Sent1 {
            return Err(wrong_phase("round3", self.phase.name()));
        }
        self.params.check_element(b1)?;
        self.params.check_element(b2)?;
        let m = b1.modpow(&n_a2, &self.params.p);
        self.n_a2 = Some(n_a2);
        self.b2 = Some(b2.clone());
        self.phase = AlicePhase::Sent3;
        Ok(m)
    }

    /// `K1 = b2^(nA1 · nA2)`, `K2 = b2^((g1 - g2 + nA1) · nA2)`, exponents mod `p - 1`.
    pub fn keys(&self) -> Result<(SymmetricKey, SymmetricKey), ProtocolError> {
        let (Some(n_a2), Some(b2)) = (&self.n_a2, &self.b2) else {
            return Err(wrong_phase("keys", self.phase.name()));
        };
        let params = &self.params;
        let order = params.order();
        let e1 = mod_mul(&self.n_a1, n_a2, &order);
        let diff = (mod_sub(&params.g1, &params.g2, &order) + &self.n_a1) % &order;
        let e2 = mod_mul(&diff, n_a2, &order);
        let k1 = SymmetricKey::new(b2.modpow(&e1, &params.p), params)?;
        let k2 = SymmetricKey::new(b2.modpow(&e2, &params.p), params)?;
        Ok((k1, k2))
    }

    /// Encrypts `S1` under `K1` and `S2` under `K2`, each with its own context.
    pub fn send(&mut self, s1: &[u8], s2: &[u8]) -> Result<(Vec<u8>, Vec<u8>), ProtocolError> {
        if self.phase != AlicePhase::Sent3 {
            return Err(wrong_phase("send", self.phase.name()));
        }
        let (k1, k2) = self.keys()?;
        self.phase = AlicePhase::Done;
        Ok((
            f_encrypt(s1, &k1, context::OT_SECRET_1),
            f_encrypt(s2, &k2, context::OT_SECRET_2),
        ))
    }

    pub fn phase(&self) -> AlicePhase {
        self.phase
    }
}

/// Bob's side: the chooser.
#[derive(Debug, Clone)]
pub struct BobOtState {
    params: GroupParams,
    choice: RootChoice,
    n_b: BigNat,
    n_b1: BigNat,
    key: Option<SymmetricKey>,
    phase: BobPhase,
}

impl BobOtState {
    /// `b1 = (a / x^gB)^(nB · nB1)`, `b2 = x^nB`, with `gB = g1` iff the choice is `First`.
    pub fn round2(
        params: &GroupParams,
        a: &BigNat,
        choice: RootChoice,
        n_b: BigNat,
        n_b1: BigNat,
    ) -> Result<(Self, BigNat, BigNat), ProtocolError> {
        params.check_element(a)?;
        let order = params.order();
        if !is_unit(&n_b1, &order) {
            return Err(ProtocolError::InvalidScalar("nB1 must be a unit mod p-1"));
        }
        let p = &params.p;
        let x_gb_inv = mod_inv(&params.pow_x(params.root(choice)), p)?;
        let b1 = mod_mul(a, &x_gb_inv, p).modpow(&mod_mul(&n_b, &n_b1, &order), p);
        let b2 = params.pow_x(&n_b);
        let state = BobOtState {
            params: params.clone(),
            choice,
            n_b,
            n_b1,
            key: None,
            phase: BobPhase::Sent2,
        };
        Ok((state, b1, b2))
    }

    /// `K_B = m^(nB1^-1 mod (p - 1))`.
    pub fn key(&mut self, m: &BigNat) -> Result<SymmetricKey, ProtocolError> {
        if self.phase != BobPhase::Sent2 {
            return Err(wrong_phase("key", self.phase.name()));
        }
        self.params.check_element(m)?;
        let inv = mod_inv(&self.n_b1, &self.params.order())?;
        let key = SymmetricKey::new(m.modpow(&inv, &self.params.p), &self.params)?;
        self.key = Some(key.clone());
        self.phase = BobPhase::HaveKey;
        Ok(key)
    }

    /// Opens the ciphertext bound to the chosen root.
    pub fn receive(&mut self, ct1: &[u8], ct2: &[u8]) -> Result<Vec<u8>, ProtocolError> {
        let key = match (self.phase, &self.key) {
            (BobPhase::HaveKey, Some(k)) => k.clone(),
            _ => return Err(wrong_phase("receive", self.phase.name())),
        };
        self.phase = BobPhase::Done;
        Ok(bob_ot_recv(ct1, ct2, &key, self.choice))
    }

    pub fn choice(&self) -> RootChoice {
        self.choice
    }

    pub fn n_b(&self) -> &BigNat {
        &self.n_b
    }

    pub fn phase(&self) -> BobPhase {
        self.phase
    }
}

pub fn bob_ot_recv(ct1: &[u8], ct2: &[u8], key: &SymmetricKey, choice: RootChoice) -> Vec<u8> {
    match choice {
        RootChoice::First => f_decrypt(ct1, key, context::OT_SECRET_1),
        RootChoice::Second => f_decrypt(ct2, key, context::OT_SECRET_2),
    }
}

fn hello(params: &GroupParams) -> Hello {
    Hello {
        protocol: ProtocolId::Ot12,
        params_digest: params.digest(),
        binding: BINDING_K1_G1,
        rounds: 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OtSenderOutcome {
    pub k1: SymmetricKey,
    pub k2: SymmetricKey,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OtReceiverOutcome {
    pub choice: RootChoice,
    pub key: SymmetricKey,
    pub secret: Vec<u8>,
}

/// Alice as a session role; initiates.
#[derive(Debug)]
pub struct OtSenderRole {
    params: GroupParams,
    secrets: (Vec<u8>, Vec<u8>),
    n_a1: BigNat,
    n_a2: BigNat,
    state: Option<AliceOtState>,
}

impl OtSenderRole {
    pub fn new(params: &GroupParams, s1: Vec<u8>, s2: Vec<u8>, n_a1: BigNat, n_a2: BigNat) -> Self {
        OtSenderRole {
            params: params.clone(),
            secrets: (s1, s2),
            n_a1,
            n_a2,
            state: None,
        }
    }

    /// Unit exponents drawn from a generator seeded with `seed`.
    pub fn random(params: &GroupParams, s1: Vec<u8>, s2: Vec<u8>, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let n_a1 = rand_unit_exponent(&params.p, &mut rng);
        let n_a2 = rand_unit_exponent(&params.p, &mut rng);
        Self::new(params, s1, s2, n_a1, n_a2)
    }
}

impl Role for OtSenderRole {
    type Output = OtSenderOutcome;

    fn hello(&self) -> Hello {
        hello(&self.params)
    }

    fn is_initiator(&self) -> bool {
        true
    }

    fn start(&mut self) -> Result<Vec<Frame>, ProtocolError> {
        let (state, a) = AliceOtState::round1(&self.params, self.n_a1.clone())?;
        self.state = Some(state);
        Ok(vec![OtMsg::Ot1 { a }.to_frame()])
    }

    fn handle(&mut self, frame: &Frame) -> Result<Vec<Frame>, ProtocolError> {
        let state = self.state.as_mut().ok_or_else(|| unexpected(frame, "not started"))?;
        match (state.phase(), OtMsg::from_frame(frame)?) {
            (AlicePhase::Sent1, OtMsg::Ot2 { b1, b2 }) => {
                let m = state.round3(&b1, &b2, self.n_a2.clone())?;
                let (ct1, ct2) = state.send(&self.secrets.0, &self.secrets.1)?;
                Ok(vec![OtMsg::Ot3 { m }.to_frame(), OtMsg::OtCts { ct1, ct2 }.to_frame()])
            }
            (AlicePhase::Sent1, _) => Err(unexpected(frame, "awaiting OT2")),
            _ => Err(unexpected(frame, "done")),
        }
    }

    fn is_done(&self) -> bool {
        matches!(&self.state, Some(s) if s.phase() == AlicePhase::Done)
    }

    fn into_output(self) -> Result<OtSenderOutcome, ProtocolError> {
        let state = self.state.ok_or(ProtocolError::WrongPhase {
            operation: "into_output",
            phase: "Init",
        })?;
        let (k1, k2) = state.keys()?;
        Ok(OtSenderOutcome { k1, k2 })
    }
}

/// Bob as a session role.
#[derive(Debug)]
pub struct OtReceiverRole {
    params: GroupParams,
    choice: RootChoice,
    n_b: BigNat,
    n_b1: BigNat,
    state: Option<BobOtState>,
    secret: Option<Vec<u8>>,
}

impl OtReceiverRole {
    pub fn new(params: &GroupParams, choice: RootChoice, n_b: BigNat, n_b1: BigNat) -> Self {
        OtReceiverRole {
            params: params.clone(),
            choice,
            n_b,
            n_b1,
            state: None,
            secret: None,
        }
    }

    pub fn random(params: &GroupParams, choice: RootChoice, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let n_b = rand_unit_exponent(&params.p, &mut rng);
        let n_b1 = rand_unit_exponent(&params.p, &mut rng);
        Self::new(params, choice, n_b, n_b1)
    }
}

impl Role for OtReceiverRole {
    type Output = OtReceiverOutcome;

    fn hello(&self) -> Hello {
        hello(&self.params)
    }

    fn is_initiator(&self) -> bool {
        false
    }

    fn start(&mut self) -> Result<Vec<Frame>, ProtocolError> {
        Ok(vec![])
    }

    fn handle(&mut self, frame: &Frame) -> Result<Vec<Frame>, ProtocolError> {
        let msg = OtMsg::from_frame(frame)?;
        match (&mut self.state, msg) {
            (None, OtMsg::Ot1 { a }) => {
                let (state, b1, b2) =
                    BobOtState::round2(&self.params, &a, self.choice, self.n_b.clone(), self.n_b1.clone())?;
                self.state = Some(state);
                Ok(vec![OtMsg::Ot2 { b1, b2 }.to_frame()])
            }
            (Some(state), OtMsg::Ot3 { m }) if state.phase() == BobPhase::Sent2 => {
                state.key(&m)?;
                Ok(vec![])
            }
            (Some(state), OtMsg::OtCts { ct1, ct2 }) if state.phase() == BobPhase::HaveKey => {
                self.secret = Some(state.receive(&ct1, &ct2)?);
                Ok(vec![])
            }
            (None, _) => Err(unexpected(frame, "awaiting OT1")),
            (Some(state), _) => Err(unexpected(
                frame,
                match state.phase() {
                    BobPhase::Sent2 => "awaiting OT3",
                    BobPhase::HaveKey => "awaiting ciphertexts",
                    BobPhase::Done => "done",
                },
            )),
        }
    }

    fn is_done(&self) -> bool {
        self.secret.is_some()
    }

    fn into_output(self) -> Result<OtReceiverOutcome, ProtocolError> {
        let incomplete = ProtocolError::WrongPhase {
            operation: "into_output",
            phase: "incomplete",
        };
        let state = self.state.ok_or(incomplete.clone())?;
        Ok(OtReceiverOutcome {
            choice: self.choice,
            key: state.key.ok_or(incomplete.clone())?,
            secret: self.secret.ok_or(incomplete)?,
        })
    }
}

/// Random unit exponents for both parties, for simulation loops.
pub fn random_exponents<R: RngCore + ?Sized>(params: &GroupParams, rng: &mut R) -> [BigNat; 4] {
    [(); 4].map(|_| rand_unit_exponent(&params.p, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::mod_exp;
    use crate::session::drive_pair;
    use num_traits::ToPrimitive;
    use std::collections::BTreeMap;

    fn n(v: u64) -> BigNat {
        BigNat::from(v)
    }

    fn units() -> Vec<u64> {
        (1..22).filter(|v| v % 2 == 1 && v % 11 != 0).collect()
    }

    fn run(choice: RootChoice, n_a1: u64, n_a2: u64, n_b: u64, n_b1: u64) -> (SymmetricKey, SymmetricKey, SymmetricKey) {
        let params = GroupParams::p23();
        let (mut alice, a) = AliceOtState::round1(&params, n(n_a1)).unwrap();
        let (mut bob, b1, b2) = BobOtState::round2(&params, &a, choice, n(n_b), n(n_b1)).unwrap();
        let m = alice.round3(&b1, &b2, n(n_a2)).unwrap();
        let kb = bob.key(&m).unwrap();
        let (k1, k2) = alice.keys().unwrap();
        (kb, k1, k2)
    }

    #[test]
    fn worked_values() {
        let params = GroupParams::p23();
        let (mut alice, a) = AliceOtState::round1(&params, n(5)).unwrap();
        assert_eq!(a, n(16));
        let (mut bob, b1, b2) = BobOtState::round2(&params, &a, RootChoice::First, n(7), n(9)).unwrap();
        assert_eq!((b1.clone(), b2.clone()), (n(17), n(17)));
        let m = alice.round3(&b1, &b2, n(4)).unwrap();
        assert_eq!(m, n(8));
        assert_eq!(bob.key(&m).unwrap().value(), &n(16));
        let (k1, k2) = alice.keys().unwrap();
        assert_eq!(k1.value(), &n(16));
        assert_eq!(k2.value(), &n(3));
    }

    #[test]
    fn identity_exponents() {
        let params = GroupParams::p23();
        let (mut alice, _) = AliceOtState::round1(&params, n(5)).unwrap();
        assert_eq!(alice.round3(&n(17), &n(17), n(1)).unwrap(), n(17));
        let (mut bob, _, _) = BobOtState::round2(&params, &n(16), RootChoice::First, n(7), n(1)).unwrap();
        assert_eq!(bob.key(&n(8)).unwrap().value(), &n(8));
    }

    #[test]
    fn scalar_and_element_errors() {
        let params = GroupParams::p23();
        assert!(matches!(AliceOtState::round1(&params, n(4)), Err(ProtocolError::InvalidScalar(_))));
        assert!(matches!(
            BobOtState::round2(&params, &n(16), RootChoice::First, n(7), n(11)),
            Err(ProtocolError::InvalidScalar(_))
        ));
        assert!(matches!(
            BobOtState::round2(&params, &n(0), RootChoice::First, n(7), n(9)),
            Err(ProtocolError::MalformedElement(_))
        ));
        let (mut alice, _) = AliceOtState::round1(&params, n(5)).unwrap();
        assert!(matches!(alice.round3(&n(23), &n(1), n(3)), Err(ProtocolError::MalformedElement(_))));
        assert!(alice.keys().is_err());
    }

    #[test]
    fn second_choice_uses_g2() {
        let params = GroupParams::p23();
        let (_, b1, _) = BobOtState::round2(&params, &n(16), RootChoice::Second, n(7), n(9)).unwrap();
        let expected = mod_exp(&(n(16) * mod_inv(&n(5).modpow(&n(20), &n(23)), &n(23)).unwrap() % 23u8), &n(63 % 22), &n(23)).unwrap();
        assert_eq!(b1, expected);
    }

    #[test]
    fn exhaustive_correctness() {
        let params = GroupParams::p23();
        for choice in [RootChoice::First, RootChoice::Second] {
            for n_a1 in units() {
                for n_a2 in units() {
                    for n_b in units() {
                        for n_b1 in units() {
                            let (kb, k1, k2) = run(choice, n_a1, n_a2, n_b, n_b1);
                            assert_ne!(k1, k2);
                            let (chosen, other) = match choice {
                                RootChoice::First => (&k1, &k2),
                                RootChoice::Second => (&k2, &k1),
                            };
                            assert_eq!(&kb, chosen);
                            assert_ne!(&kb, other);
                            // closed form x^((g1 - gB + nA1) · nB · nA2)
                            let diff = mod_sub(&(n(3) + n(n_a1)), params.root(choice), &n(22));
                            let e = diff * n_b * n_a2 % 22u8;
                            assert_eq!(kb.value(), &params.pow_x(&e));
                        }
                    }
                }
            }
        }
    }

    /// Alice's view of Bob's second message, as a multiset over all unit exponents.
    fn view(choice: RootChoice) -> BTreeMap<(u64, u64), usize> {
        let params = GroupParams::p23();
        let mut out = BTreeMap::new();
        for n_a1 in units() {
            let (_, a) = AliceOtState::round1(&params, n(n_a1)).unwrap();
            for n_b in units() {
                for n_b1 in units() {
                    let (_, b1, b2) = BobOtState::round2(&params, &a, choice, n(n_b), n(n_b1)).unwrap();
                    *out.entry((b1.to_u64().unwrap(), b2.to_u64().unwrap())).or_insert(0) += 1;
                }
            }
        }
        out
    }

    fn is_residue(v: u64) -> bool {
        n(v).modpow(&n(11), &n(23)) == n(1)
    }

    #[test]
    fn b2_is_independent_of_choice() {
        let marginal = |choice| {
            let mut m = BTreeMap::new();
            for ((_, b2), count) in view(choice) {
                *m.entry(b2).or_insert(0) += count;
            }
            m
        };
        assert_eq!(marginal(RootChoice::First), marginal(RootChoice::Second));
    }

    #[test]
    fn choice_shows_in_quadratic_character_of_b1() {
        // g1 - g2 is odd mod p - 1, so x^(g1 - gB + nA1) has odd exponent iff gB = g1
        let first = view(RootChoice::First);
        let second = view(RootChoice::Second);
        assert_ne!(first, second);
        assert!(first.keys().all(|&(b1, _)| !is_residue(b1)));
        assert!(second.keys().all(|&(b1, _)| is_residue(b1)));
    }

    #[test]
    fn ciphertexts() {
        let params = GroupParams::p23();
        let (mut alice, a) = AliceOtState::round1(&params, n(5)).unwrap();
        let (mut bob, b1, b2) = BobOtState::round2(&params, &a, RootChoice::Second, n(7), n(9)).unwrap();
        let m = alice.round3(&b1, &b2, n(3)).unwrap();
        bob.key(&m).unwrap();
        let (ct1, ct2) = alice.send(b"first", b"second").unwrap();
        assert_eq!(bob.receive(&ct1, &ct2).unwrap(), b"second");
        let kb = bob.key.clone().unwrap();
        assert_ne!(bob_ot_recv(&ct1, &ct2, &kb, RootChoice::First), b"first");
        assert!(matches!(alice.send(b"", b""), Err(ProtocolError::WrongPhase { .. })));
    }

    #[test]
    fn empty_secrets() {
        let params = GroupParams::p23();
        let out = drive_pair(
            OtSenderRole::new(&params, vec![], vec![], n(5), n(3)),
            OtReceiverRole::new(&params, RootChoice::First, n(7), n(9)),
        );
        assert!(out.second.unwrap().secret.is_empty());
    }

    #[test]
    fn session_delivers_chosen_secret() {
        let params = GroupParams::p23();
        for (choice, want) in [(RootChoice::First, &b"one"[..]), (RootChoice::Second, &b"two"[..])] {
            for seed in 0..20 {
                let out = drive_pair(
                    OtSenderRole::random(&params, b"one".to_vec(), b"two".to_vec(), seed),
                    OtReceiverRole::random(&params, choice, seed + 100),
                );
                let alice = out.first.unwrap();
                let bob = out.second.unwrap();
                assert_eq!(bob.secret, want);
                let expected = if choice == RootChoice::First { &alice.k1 } else { &alice.k2 };
                assert_eq!(&bob.key, expected);
            }
        }
    }

    #[test]
    fn frames_round_trip() {
        for m in [
            OtMsg::Ot1 { a: n(16) },
            OtMsg::Ot2 { b1: n(17), b2: n(1) },
            OtMsg::Ot3 { m: n(8) },
            OtMsg::OtCts {
                ct1: vec![1, 2],
                ct2: vec![],
            },
        ] {
            assert_eq!(OtMsg::from_frame(&m.to_frame()).unwrap(), m);
        }
    }

    #[test]
    fn hello_announces_binding() {
        let role = OtSenderRole::random(&GroupParams::p23(), vec![], vec![], 0);
        assert_eq!(role.hello().binding, BINDING_K1_G1);
    }
}
