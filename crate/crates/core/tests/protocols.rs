use std::net::TcpListener;
use std::sync::OnceLock;
use std::thread;

use dhot_core::coinflip::{CoinFlipAlice, CoinFlipBob, CoinMsg};
use dhot_core::mutual::{KeyReceiver, KeySender, MutualMsg, MutualParty, PeerSecret, Side};
use dhot_core::numtheory::{mod_inv, mod_mul, mod_sub, BigNat};
use dhot_core::ot12::{AliceOtState, BobOtState, OtMsg, OtReceiverRole, OtSenderRole};
use dhot_core::params::{generate_params, GroupParams, RootChoice};
use dhot_core::session::{
    drive_pair, drive_session, memory_channel_pair, AbortReason, Channel, Direction, Frame, ProtocolId, Role,
    SessionError, SocketChannel, Transcript,
};
use dhot_core::zkp::{HonestProver, ProverRole, VerifierRole, ZkMsg, ZkPublic};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn params64() -> &'static GroupParams {
    static P: OnceLock<GroupParams> = OnceLock::new();
    P.get_or_init(|| generate_params(64, &mut ChaCha20Rng::seed_from_u64(64)).unwrap())
}

fn root(first: bool) -> RootChoice {
    if first {
        RootChoice::First
    } else {
        RootChoice::Second
    }
}

/// A unit mod `p - 1` derived from `seed`, by stepping to the next odd non-multiple of `q`.
fn unit(params: &GroupParams, seed: u64) -> BigNat {
    let order = params.order();
    let mut v = (BigNat::from(seed) % &order) | BigNat::from(1u8);
    while mod_inv(&v, &order).is_err() {
        v = (v + 2u8) % &order;
    }
    v
}

fn assert_mirrored(a: &Transcript, b: &Transcript) {
    assert_eq!(a.len(), b.len());
    let sent: Vec<&Frame> = a.frames(Direction::Sent).collect();
    let recv: Vec<&Frame> = b.frames(Direction::Received).collect();
    assert_eq!(sent, recv);
    let sent: Vec<&Frame> = b.frames(Direction::Sent).collect();
    let recv: Vec<&Frame> = a.frames(Direction::Received).collect();
    assert_eq!(sent, recv);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn key_agreement_iff_same_root(ga: bool, gb: bool, s1: u64, s2: u64, s3: u64) {
        let params = params64();
        let (mut alice, offer) = KeySender::start(params, root(ga), unit(params, s1), unit(params, s2)).unwrap();
        let (bob, reply) = KeyReceiver::respond(params, &offer, root(gb), unit(params, s3)).unwrap();
        let key = alice.compute_key(&reply).unwrap();
        prop_assert_eq!(&key == bob.key(), ga == gb);
    }

    #[test]
    fn ot_receiver_gets_the_bound_key(first: bool, s1: u64, s2: u64, s3: u64, s4: u64) {
        let params = params64();
        let (mut alice, a) = AliceOtState::round1(params, unit(params, s1)).unwrap();
        let (mut bob, b1, b2) = BobOtState::round2(params, &a, root(first), unit(params, s3), unit(params, s4)).unwrap();
        let m = alice.round3(&b1, &b2, unit(params, s2)).unwrap();
        let kb = bob.key(&m).unwrap();
        let (k1, k2) = alice.keys().unwrap();
        prop_assert_ne!(&k1, &k2);
        prop_assert_eq!(kb, if first { k1 } else { k2 });
    }

    #[test]
    fn ot_key_closed_form(first: bool, s1: u64, s2: u64, s3: u64, s4: u64) {
        // K_B = x^((g1 - gB + nA1) · nB · nA2)
        let params = params64();
        let order = params.order();
        let (n_a1, n_a2, n_b, n_b1) = (unit(params, s1), unit(params, s2), unit(params, s3), unit(params, s4));
        let (mut alice, a) = AliceOtState::round1(params, n_a1.clone()).unwrap();
        let (mut bob, b1, b2) = BobOtState::round2(params, &a, root(first), n_b.clone(), n_b1).unwrap();
        let m = alice.round3(&b1, &b2, n_a2.clone()).unwrap();
        let kb = bob.key(&m).unwrap();
        let diff = mod_sub(&(&params.g1 + &n_a1), params.root(root(first)), &order);
        let e = mod_mul(&mod_mul(&diff, &n_b, &order), &n_a2, &order);
        prop_assert_eq!(kb.value(), &params.pow_x(&e));
    }

    #[test]
    fn mutual_messages_survive_framing(a in 1u64.., b in 1u64.., bytes in proptest::collection::vec(any::<u8>(), 0..100)) {
        use dhot_core::mutual::{Claim, Confirm, ConfirmReply, Offer, Reply, SecretCt};
        let msgs = [
            MutualMsg::Offer(Offer { a1: a.into(), a2: b.into() }),
            MutualMsg::Reply(Reply { b1: a.into() }),
            MutualMsg::Confirm(Confirm { c: bytes.clone() }),
            MutualMsg::ConfirmReply(ConfirmReply { y: bytes.clone() }),
            MutualMsg::Claim(Claim { masked: bytes.clone() }),
            MutualMsg::SecretCt(SecretCt { ct: bytes }),
        ];
        for m in msgs {
            prop_assert_eq!(MutualMsg::from_frame(&m.to_frame()).unwrap(), m);
        }
        let ot = OtMsg::Ot2 { b1: a.into(), b2: b.into() };
        prop_assert_eq!(OtMsg::from_frame(&ot.to_frame()).unwrap(), ot);
    }

    #[test]
    fn arbitrary_payloads_never_panic(protocol in 1u8..5, msg_type in 0u8..8, payload in proptest::collection::vec(any::<u8>(), 0..40)) {
        let frame = Frame::new(ProtocolId::try_from(protocol).unwrap(), msg_type, payload);
        let _ = MutualMsg::from_frame(&frame);
        let _ = OtMsg::from_frame(&frame);
        let _ = CoinMsg::from_frame(&frame);
        let _ = ZkMsg::from_frame(&frame);
    }

    #[test]
    fn mutual_sessions_mirror_and_agree(seed in any::<u64>()) {
        let params = params64();
        let out = drive_pair(
            MutualParty::random(params, Side::Alice, b"from alice".to_vec(), seed),
            MutualParty::random(params, Side::Bob, b"from bob".to_vec(), seed.wrapping_add(1)),
        );
        assert_mirrored(&out.first_transcript, &out.second_transcript);
        let alice = out.first.unwrap();
        let bob = out.second.unwrap();
        prop_assert_eq!(bob.matched, bob.received_key == alice.own_key);
        prop_assert_eq!(alice.matched, alice.received_key == bob.own_key);
        match bob.peer_secret {
            PeerSecret::Received(s) => prop_assert_eq!(s, b"from alice".to_vec()),
            PeerSecret::NotReceived => prop_assert!(!bob.matched),
            PeerSecret::Recovered(_) => prop_assert!(false),
        }
    }
}

fn seeded_roles(params: &GroupParams, seed: u64) -> (MutualParty, MutualParty) {
    (
        MutualParty::random(params, Side::Alice, b"a".to_vec(), seed),
        MutualParty::random(params, Side::Bob, b"b".to_vec(), seed + 1),
    )
}

#[test]
fn seeded_sessions_are_byte_identical() {
    let params = params64();
    let (a, b) = seeded_roles(params, 7);
    let first = drive_pair(a, b);
    let (a, b) = seeded_roles(params, 7);
    let second = drive_pair(a, b);
    assert_eq!(first.first_transcript.to_text(), second.first_transcript.to_text());
    assert_eq!(first.second_transcript.to_text(), second.second_transcript.to_text());
    let (a, b) = seeded_roles(params, 8);
    assert_ne!(drive_pair(a, b).first_transcript, first.first_transcript);
}

#[test]
fn transcript_text_round_trips() {
    let params = params64();
    let (a, b) = seeded_roles(params, 11);
    let out = drive_pair(a, b);
    let text = out.first_transcript.to_text();
    assert_eq!(Transcript::from_text(&text).unwrap(), out.first_transcript);
}

fn socket_pair() -> (SocketChannel, SocketChannel) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let accept = thread::spawn(move || SocketChannel::from_stream(listener.accept().unwrap().0).unwrap());
    let dialed = SocketChannel::dial(&addr).unwrap();
    (dialed, accept.join().unwrap())
}

fn run_threaded<A, B, CA, CB>(a: A, b: B, (mut ca, mut cb): (CA, CB)) -> (Transcript, Transcript)
where
    A: Role,
    B: Role + Send + 'static,
    CA: Channel,
    CB: Channel + Send + 'static,
{
    let h = thread::spawn(move || {
        let mut t = Transcript::new();
        assert!(drive_session(b, &mut cb, &mut t).is_ok());
        cb.close();
        t
    });
    let mut t = Transcript::new();
    assert!(drive_session(a, &mut ca, &mut t).is_ok());
    ca.close();
    (t, h.join().unwrap())
}

#[test]
fn ot_and_coinflip_match_across_transports() {
    let params = params64();
    let ot = || {
        (
            OtSenderRole::random(params, b"one".to_vec(), b"two".to_vec(), 3),
            OtReceiverRole::random(params, RootChoice::Second, 4),
        )
    };
    let (a, b) = ot();
    let memory = run_threaded(a, b, memory_channel_pair());
    let (a, b) = ot();
    let socket = run_threaded(a, b, socket_pair());
    assert_eq!(memory, socket);
    let (a, b) = ot();
    let lockstep = drive_pair(a, b);
    assert_eq!(lockstep.first_transcript, memory.0);

    let flip = || (CoinFlipAlice::random(params, 5), CoinFlipBob::random(params, 6));
    let (a, b) = flip();
    let memory = run_threaded(a, b, memory_channel_pair());
    let (a, b) = flip();
    let socket = run_threaded(a, b, socket_pair());
    assert_eq!(memory, socket);
    assert_mirrored(&memory.0, &memory.1);
}

#[test]
fn different_parameters_fail_the_hello() {
    let other = GroupParams::p23();
    let out = drive_pair(
        MutualParty::random(params64(), Side::Alice, vec![], 1),
        MutualParty::random(&other, Side::Bob, vec![], 2),
    );
    assert!(matches!(out.first, Err(SessionError::PeerAborted(AbortReason::HelloMismatch))));
    assert!(out.second.is_err());
}

#[test]
fn different_round_counts_fail_the_hello() {
    let params = params64();
    let public = ZkPublic::for_secret(params, &BigNat::from(99u8));
    let out = drive_pair(
        ProverRole::new(params, public.clone(), Box::new(HonestProver::new(BigNat::from(99u8))), 5, 1),
        VerifierRole::new(params, public, 6, 2),
    );
    assert!(out.first.is_err() && out.second.is_err());
}

#[test]
fn zkp_wrong_statement_fails_the_hello() {
    let params = params64();
    let honest = ZkPublic::for_secret(params, &BigNat::from(99u8));
    let other = ZkPublic::for_secret(params, &BigNat::from(98u8));
    let out = drive_pair(
        ProverRole::new(params, honest, Box::new(HonestProver::new(BigNat::from(99u8))), 5, 1),
        VerifierRole::new(params, other, 5, 2),
    );
    assert!(out.second.is_err());
}
