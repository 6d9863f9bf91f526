//! Coin flipping on top of one key transfer.
//!
//! Alice sends the offer, Bob replies and declares the key he computed.
//! Bob wins iff the declared key equals Alice's. Alice then reveals her root
//! and exponents so Bob can recompute her first message and her key, and
//! check the verdict. Bob never reveals his own choices.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::ProtocolError;
use crate::mutual::{KeyReceiver, KeySender, Offer, Reply};
use crate::numtheory::{is_unit, mod_inv, mod_mul, rand_unit_exponent, BigNat};
use crate::params::{GroupParams, RootChoice};
use crate::session::codec::{CodecError, Frame, PayloadReader, PayloadWriter, ProtocolId};
use crate::session::driver::{Hello, Role};
use crate::session::{unexpected, Direction, Transcript};

pub const MSG_OFFER: u8 = 1;
pub const MSG_REPLY: u8 = 2;
pub const MSG_DECLARE: u8 = 3;
pub const MSG_VERDICT: u8 = 4;
pub const MSG_REVEAL: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    BobWins,
    AliceWins,
}

impl Winner {
    pub fn code(self) -> u8 {
        match self {
            Winner::BobWins => 1,
            Winner::AliceWins => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self, CodecError> {
        match code {
            1 => Ok(Winner::BobWins),
            2 => Ok(Winner::AliceWins),
            c => Err(CodecError::InvalidValue("verdict", c as u64)),
        }
    }
}

/// Alice's disclosed choices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoinReveal {
    pub g_a: BigNat,
    pub n_a1: BigNat,
    pub n_a2: BigNat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoinMsg {
    Offer(Offer),
    Reply(Reply),
    Declare { k: BigNat },
    Verdict(Winner),
    Reveal(CoinReveal),
}

impl CoinMsg {
    pub fn to_frame(&self) -> Frame {
        let w = PayloadWriter::new();
        let (t, payload) = match self {
            CoinMsg::Offer(o) => (MSG_OFFER, o.payload()),
            CoinMsg::Reply(r) => (MSG_REPLY, r.payload()),
            CoinMsg::Declare { k } => (MSG_DECLARE, w.nat(k).finish()),
            CoinMsg::Verdict(v) => (MSG_VERDICT, w.u8(v.code()).finish()),
            CoinMsg::Reveal(r) => (MSG_REVEAL, w.nat(&r.g_a).nat(&r.n_a1).nat(&r.n_a2).finish()),
        };
        Frame::new(ProtocolId::CoinFlip, t, payload)
    }

    pub fn from_frame(frame: &Frame) -> Result<Self, ProtocolError> {
        if frame.protocol != ProtocolId::CoinFlip {
            return Err(unexpected(frame, "coinflip"));
        }
        let p = &frame.payload;
        let mut r = PayloadReader::new(p);
        let msg = match frame.msg_type {
            MSG_OFFER => return Ok(CoinMsg::Offer(Offer::parse(p)?)),
            MSG_REPLY => return Ok(CoinMsg::Reply(Reply::parse(p)?)),
            MSG_DECLARE => CoinMsg::Declare { k: r.nat()? },
            MSG_VERDICT => CoinMsg::Verdict(Winner::from_code(r.u8()?)?),
            MSG_REVEAL => CoinMsg::Reveal(CoinReveal {
                g_a: r.nat()?,
                n_a1: r.nat()?,
                n_a2: r.nat()?,
            }),
            _ => return Err(unexpected(frame, "coinflip")),
        };
        r.finish()?;
        Ok(msg)
    }
}

/// The key Bob declares: his `K'`.
pub fn bob_declare(receiver: &KeyReceiver) -> BigNat {
    receiver.key().value().clone()
}

/// Bob wins iff `declared` equals Alice's key.
pub fn alice_adjudicate(
    params: &GroupParams,
    sender: &KeySender,
    declared: &BigNat,
) -> Result<(Winner, CoinReveal), ProtocolError> {
    params.check_element(declared)?;
    let winner = if sender.key()?.value() == declared {
        Winner::BobWins
    } else {
        Winner::AliceWins
    };
    let reveal = CoinReveal {
        g_a: params.root(sender.root()).clone(),
        n_a1: sender.n1().clone(),
        n_a2: sender.n2().clone(),
    };
    Ok((winner, reveal))
}

fn find_msg(transcript: &Transcript, direction: Direction, msg_type: u8, what: &'static str) -> Result<CoinMsg, ProtocolError> {
    let frame = transcript
        .find(direction, ProtocolId::CoinFlip, msg_type)
        .ok_or(ProtocolError::IncompleteTranscript(what))?;
    CoinMsg::from_frame(frame)
}

/// Checks a reveal against the offer, reply, declaration and verdict in Bob's
/// transcript. Fields must be canonical: `g_a` one of the two roots, `n_a1` a
/// unit and `n_a2` reduced mod `p - 1`.
pub fn bob_verify(params: &GroupParams, reveal: &CoinReveal, transcript: &Transcript) -> Result<bool, ProtocolError> {
    let CoinMsg::Offer(offer) = find_msg(transcript, Direction::Received, MSG_OFFER, "offer")? else {
        unreachable!("frame type selects the variant")
    };
    let CoinMsg::Reply(reply) = find_msg(transcript, Direction::Sent, MSG_REPLY, "reply")? else {
        unreachable!("frame type selects the variant")
    };
    let CoinMsg::Declare { k: declared } = find_msg(transcript, Direction::Sent, MSG_DECLARE, "declaration")? else {
        unreachable!("frame type selects the variant")
    };
    let CoinMsg::Verdict(verdict) = find_msg(transcript, Direction::Received, MSG_VERDICT, "verdict")? else {
        unreachable!("frame type selects the variant")
    };

    let order = params.order();
    if params.choice_of(&reveal.g_a).is_none() || !is_unit(&reveal.n_a1, &order) || reveal.n_a2 >= order {
        return Ok(false);
    }
    let a1 = params.pow_x(&((&reveal.g_a + &reveal.n_a1) % &order));
    let a2 = params.pow_x(&reveal.n_a2);
    if a1 != offer.a1 || a2 != offer.a2 {
        return Ok(false);
    }
    let exponent = mod_mul(&reveal.n_a2, &mod_inv(&reveal.n_a1, &order)?, &order);
    let k_a = reply.b1.modpow(&exponent, &params.p);
    let expected = if k_a == declared {
        Winner::BobWins
    } else {
        Winner::AliceWins
    };
    Ok(expected == verdict)
}

fn hello(params: &GroupParams) -> Hello {
    Hello {
        protocol: ProtocolId::CoinFlip,
        params_digest: params.digest(),
        binding: 0,
        rounds: 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliceFlipOutcome {
    pub winner: Winner,
    pub reveal: CoinReveal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BobFlipOutcome {
    /// The verdict Alice announced.
    pub winner: Winner,
    pub verified: bool,
    pub declared: BigNat,
}

#[derive(Debug)]
pub struct CoinFlipAlice {
    params: GroupParams,
    root: RootChoice,
    n1: BigNat,
    n2: BigNat,
    sender: Option<KeySender>,
    outcome: Option<AliceFlipOutcome>,
}

impl CoinFlipAlice {
    pub fn new(params: &GroupParams, root: RootChoice, n1: BigNat, n2: BigNat) -> Self {
        CoinFlipAlice {
            params: params.clone(),
            root,
            n1,
            n2,
            sender: None,
            outcome: None,
        }
    }

    pub fn random(params: &GroupParams, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let root = RootChoice::random(&mut rng);
        let n1 = rand_unit_exponent(&params.p, &mut rng);
        let n2 = rand_unit_exponent(&params.p, &mut rng);
        Self::new(params, root, n1, n2)
    }
}

impl Role for CoinFlipAlice {
    type Output = AliceFlipOutcome;

    fn hello(&self) -> Hello {
        hello(&self.params)
    }

    fn is_initiator(&self) -> bool {
        true
    }

    fn start(&mut self) -> Result<Vec<Frame>, ProtocolError> {
        let (sender, offer) = KeySender::start(&self.params, self.root, self.n1.clone(), self.n2.clone())?;
        self.sender = Some(sender);
        Ok(vec![CoinMsg::Offer(offer).to_frame()])
    }

    fn handle(&mut self, frame: &Frame) -> Result<Vec<Frame>, ProtocolError> {
        let Some(sender) = self.sender.as_mut() else {
            return Err(unexpected(frame, "not started"));
        };
        match CoinMsg::from_frame(frame)? {
            CoinMsg::Reply(reply) if sender.key().is_err() => {
                sender.compute_key(&reply)?;
                Ok(vec![])
            }
            CoinMsg::Declare { k } if sender.key().is_ok() && self.outcome.is_none() => {
                let (winner, reveal) = alice_adjudicate(&self.params, sender, &k)?;
                let frames = vec![
                    CoinMsg::Verdict(winner).to_frame(),
                    CoinMsg::Reveal(reveal.clone()).to_frame(),
                ];
                self.outcome = Some(AliceFlipOutcome { winner, reveal });
                Ok(frames)
            }
            _ => Err(unexpected(frame, "coinflip alice")),
        }
    }

    fn is_done(&self) -> bool {
        self.outcome.is_some()
    }

    fn into_output(self) -> Result<AliceFlipOutcome, ProtocolError> {
        self.outcome.ok_or(ProtocolError::WrongPhase {
            operation: "into_output",
            phase: "undecided",
        })
    }
}

#[derive(Debug)]
pub struct CoinFlipBob {
    params: GroupParams,
    root: RootChoice,
    n: BigNat,
    receiver: Option<KeyReceiver>,
    record: Transcript,
    verdict: Option<Winner>,
    outcome: Option<BobFlipOutcome>,
}

impl CoinFlipBob {
    pub fn new(params: &GroupParams, root: RootChoice, n: BigNat) -> Self {
        CoinFlipBob {
            params: params.clone(),
            root,
            n,
            receiver: None,
            record: Transcript::new(),
            verdict: None,
            outcome: None,
        }
    }

    pub fn random(params: &GroupParams, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let root = RootChoice::random(&mut rng);
        let n = rand_unit_exponent(&params.p, &mut rng);
        Self::new(params, root, n)
    }
}

impl Role for CoinFlipBob {
    type Output = BobFlipOutcome;

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
        let msg = CoinMsg::from_frame(frame)?;
        self.record.record(Direction::Received, frame.clone());
        let out = match (&self.receiver, msg) {
            (None, CoinMsg::Offer(offer)) => {
                let (receiver, reply) = KeyReceiver::respond(&self.params, &offer, self.root, self.n.clone())?;
                let declared = bob_declare(&receiver);
                self.receiver = Some(receiver);
                vec![CoinMsg::Reply(reply).to_frame(), CoinMsg::Declare { k: declared }.to_frame()]
            }
            (Some(_), CoinMsg::Verdict(winner)) if self.verdict.is_none() => {
                self.verdict = Some(winner);
                vec![]
            }
            (Some(receiver), CoinMsg::Reveal(reveal)) if self.outcome.is_none() => {
                let winner = self.verdict.ok_or(ProtocolError::IncompleteTranscript("verdict"))?;
                let verified = bob_verify(&self.params, &reveal, &self.record)?;
                self.outcome = Some(BobFlipOutcome {
                    winner,
                    verified,
                    declared: bob_declare(receiver),
                });
                vec![]
            }
            _ => return Err(unexpected(frame, "coinflip bob")),
        };
        for f in &out {
            self.record.record(Direction::Sent, f.clone());
        }
        Ok(out)
    }

    fn is_done(&self) -> bool {
        self.outcome.is_some()
    }

    fn into_output(self) -> Result<BobFlipOutcome, ProtocolError> {
        self.outcome.ok_or(ProtocolError::WrongPhase {
            operation: "into_output",
            phase: "undecided",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::drive_pair;

    fn n(v: u64) -> BigNat {
        BigNat::from(v)
    }

    /// Bob's transcript of an honest exchange, plus Alice's verdict and reveal.
    fn exchange(g_a: RootChoice, g_b: RootChoice) -> (Transcript, Winner, CoinReveal, BigNat) {
        let params = GroupParams::p23();
        let (mut sender, offer) = KeySender::start(&params, g_a, n(5), n(15)).unwrap();
        let (receiver, reply) = KeyReceiver::respond(&params, &offer, g_b, n(17)).unwrap();
        sender.compute_key(&reply).unwrap();
        let declared = bob_declare(&receiver);
        let (winner, reveal) = alice_adjudicate(&params, &sender, &declared).unwrap();
        let mut t = Transcript::new();
        t.record(Direction::Received, CoinMsg::Offer(offer).to_frame());
        t.record(Direction::Sent, CoinMsg::Reply(reply).to_frame());
        t.record(Direction::Sent, CoinMsg::Declare { k: declared.clone() }.to_frame());
        t.record(Direction::Received, CoinMsg::Verdict(winner).to_frame());
        (t, winner, reveal, declared)
    }

    fn with_verdict(t: &Transcript, verdict: Winner) -> Transcript {
        let mut out = Transcript::new();
        for e in t.entries() {
            let frame = if e.frame.msg_type == MSG_VERDICT {
                CoinMsg::Verdict(verdict).to_frame()
            } else {
                e.frame.clone()
            };
            out.record(e.direction, frame);
        }
        out
    }

    #[test]
    fn declarations() {
        let (_, winner, _, declared) = exchange(RootChoice::First, RootChoice::First);
        assert_eq!(declared, n(21));
        assert_eq!(winner, Winner::BobWins);
        let (_, winner, reveal, declared) = exchange(RootChoice::First, RootChoice::Second);
        assert_eq!(declared, n(21));
        assert_eq!(winner, Winner::AliceWins);
        assert_eq!(reveal, CoinReveal { g_a: n(3), n_a1: n(5), n_a2: n(15) });
    }

    #[test]
    fn zero_declaration_is_malformed() {
        let params = GroupParams::p23();
        let (sender, _) = KeySender::start(&params, RootChoice::First, n(5), n(15)).unwrap();
        let mut sender = sender;
        sender.compute_key(&Reply { b1: n(7) }).unwrap();
        assert!(matches!(
            alice_adjudicate(&params, &sender, &n(0)),
            Err(ProtocolError::MalformedElement(_))
        ));
    }

    #[test]
    fn honest_reveals_verify() {
        let params = GroupParams::p23();
        for g_a in [RootChoice::First, RootChoice::Second] {
            for g_b in [RootChoice::First, RootChoice::Second] {
                let (t, _, reveal, _) = exchange(g_a, g_b);
                assert!(bob_verify(&params, &reveal, &t).unwrap());
            }
        }
    }

    #[test]
    fn flipped_root_is_caught() {
        let params = GroupParams::p23();
        let (t, _, mut reveal, _) = exchange(RootChoice::First, RootChoice::First);
        reveal.g_a = n(20);
        assert_eq!(params.pow_x(&n(25 % 22)), n(10));
        assert!(!bob_verify(&params, &reveal, &t).unwrap());
    }

    #[test]
    fn lying_verdict_is_caught() {
        let params = GroupParams::p23();
        for (g_b, honest) in [(RootChoice::First, Winner::BobWins), (RootChoice::Second, Winner::AliceWins)] {
            let (t, winner, reveal, _) = exchange(RootChoice::First, g_b);
            assert_eq!(winner, honest);
            let lie = if honest == Winner::BobWins { Winner::AliceWins } else { Winner::BobWins };
            assert!(!bob_verify(&params, &reveal, &with_verdict(&t, lie)).unwrap());
        }
    }

    #[test]
    fn every_single_field_perturbation_is_rejected() {
        let params = GroupParams::p23();
        for g_a in [RootChoice::First, RootChoice::Second] {
            for g_b in [RootChoice::First, RootChoice::Second] {
                let (t, _, reveal, _) = exchange(g_a, g_b);
                for delta in [1i64, -1] {
                    let shift = |v: &BigNat| BigNat::from((u64::try_from(v).unwrap() as i64 + delta) as u64);
                    for field in 0..3 {
                        let mut r = reveal.clone();
                        match field {
                            0 => r.g_a = shift(&r.g_a),
                            1 => r.n_a1 = shift(&r.n_a1),
                            _ => r.n_a2 = shift(&r.n_a2),
                        }
                        assert!(!bob_verify(&params, &r, &t).unwrap(), "{field} {delta}");
                    }
                }
            }
        }
    }

    #[test]
    fn missing_frames() {
        let params = GroupParams::p23();
        let (t, _, reveal, _) = exchange(RootChoice::First, RootChoice::First);
        for skip in 0..t.len() {
            let mut partial = Transcript::new();
            for (i, e) in t.entries().iter().enumerate() {
                if i != skip {
                    partial.record(e.direction, e.frame.clone());
                }
            }
            assert!(matches!(
                bob_verify(&params, &reveal, &partial),
                Err(ProtocolError::IncompleteTranscript(_))
            ));
        }
    }

    #[test]
    fn sessions_agree_and_verify() {
        let params = GroupParams::p23();
        let mut bob_wins = 0;
        for seed in 0..200 {
            let out = drive_pair(CoinFlipAlice::random(&params, seed), CoinFlipBob::random(&params, seed + 1000));
            let a = out.first.unwrap();
            let b = out.second.unwrap();
            assert_eq!(a.winner, b.winner);
            assert!(b.verified);
            bob_wins += (a.winner == Winner::BobWins) as u32;
        }
        assert!((60..140).contains(&bob_wins), "{bob_wins}");
    }

    #[test]
    fn frames_round_trip() {
        for m in [
            CoinMsg::Offer(Offer { a1: n(16), a2: n(19) }),
            CoinMsg::Reply(Reply { b1: n(7) }),
            CoinMsg::Declare { k: n(21) },
            CoinMsg::Verdict(Winner::AliceWins),
            CoinMsg::Reveal(CoinReveal { g_a: n(3), n_a1: n(5), n_a2: n(15) }),
        ] {
            assert_eq!(CoinMsg::from_frame(&m.to_frame()).unwrap(), m);
        }
        let bad = Frame::new(ProtocolId::CoinFlip, MSG_VERDICT, vec![9]);
        assert!(CoinMsg::from_frame(&bad).is_err());
    }
}
