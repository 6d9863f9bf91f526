use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant};

use dhot_core::coinflip::{CoinFlipAlice, CoinFlipBob, Winner};
use dhot_core::mutual::{MutualChoices, MutualOutcome, MutualParty, PeerSecret, Side};
use dhot_core::numtheory::{is_unit, BigNat};
use dhot_core::ot12::{random_exponents, OtReceiverRole, OtSenderRole};
use dhot_core::params::{GroupParams, RootChoice};
use dhot_core::session::{
    drive_session, memory_channel_pair, Channel, Role, SessionError, SocketChannel, Transcript, TransportError,
};
use dhot_core::zkp::{secret_from_password, HonestProver, ImposterProver, ProverRole, ProverStrategy, VerifierRole, ZkOutcome, ZkPublic};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::args::{Mode, Protocol, RoleName, RunArgs};
use crate::common::{load_params, parse_nat, parse_root, read_secret, resolve_seed, show_secret};
use crate::error::CliError;

const DIAL_PATIENCE: Duration = Duration::from_secs(10);
const DIAL_RETRY: Duration = Duration::from_millis(50);

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let params = load_params(&args.source)?.ok_or_else(|| CliError::config("one of --params or --toy is required"))?;
    if args.mode == Mode::Socket && (args.role.is_none() || args.address.is_none()) {
        return Err(CliError::config("socket mode requires --role and --address"));
    }
    let seed = resolve_seed(args.seed);
    match args.protocol {
        Protocol::Mutual => run_mutual(&params, args, seed, out),
        Protocol::Ot => run_ot(&params, args, seed, out),
        Protocol::Coinflip => run_coinflip(&params, args, seed, out),
        Protocol::Zkp => run_zkp(&params, args, seed, out),
    }
}

/// The side this invocation plays; both in memory mode.
fn plays(args: &RunArgs, role: RoleName) -> bool {
    args.mode == Mode::Memory || args.role == Some(role)
}

fn required_secret(flag: &str, value: &Option<String>) -> Result<Vec<u8>, CliError> {
    let source = value.as_deref().ok_or_else(|| CliError::config(format!("{flag} is required")))?;
    read_secret(source)
}

/// Secret of `role`: `--secret-a`/`--secret-b` in memory mode, `--secret` for the local side in socket mode.
fn party_secret(args: &RunArgs, role: RoleName) -> Result<Vec<u8>, CliError> {
    match (args.mode, role) {
        (Mode::Memory, RoleName::Alice) => required_secret("--secret-a", &args.secret_a),
        (Mode::Memory, RoleName::Bob) => required_secret("--secret-b", &args.secret_b),
        (Mode::Socket, r) if args.role == Some(r) => required_secret("--secret", &args.secret),
        _ => Ok(Vec::new()),
    }
}

fn forced_exponents(params: &GroupParams, args: &RunArgs, count: usize) -> Result<Option<Vec<BigNat>>, CliError> {
    let Some(values) = &args.vectors.force_exponents else {
        return Ok(None);
    };
    if values.len() != count {
        return Err(CliError::config(format!(
            "--force-exponents takes {count} comma-separated values for {}",
            args.protocol.name()
        )));
    }
    let nats = values
        .iter()
        .map(|v| parse_nat("--force-exponents", v))
        .collect::<Result<Vec<_>, _>>()?;
    if !is_unit(&nats[0], &params.order()) {
        return Err(CliError::config(format!("--force-exponents: nA1={} is not invertible mod p-1", nats[0])));
    }
    Ok(Some(nats))
}

fn forced_roots(params: &GroupParams, args: &RunArgs) -> Result<(Option<RootChoice>, Option<RootChoice>), CliError> {
    let ga = args.vectors.force_ga.as_deref().map(|v| parse_root(params, "--force-ga", v)).transpose()?;
    let gb = args.vectors.force_gb.as_deref().map(|v| parse_root(params, "--force-gb", v)).transpose()?;
    Ok((ga, gb))
}

fn no_forced_roots(args: &RunArgs) -> Result<(), CliError> {
    if args.vectors.force_ga.is_some() || args.vectors.force_gb.is_some() {
        return Err(CliError::config(format!("--force-ga/--force-gb do not apply to {}", args.protocol.name())));
    }
    Ok(())
}

fn transport(e: TransportError) -> CliError {
    CliError::Session(SessionError::Transport(e))
}

fn connect(args: &RunArgs) -> Result<SocketChannel, CliError> {
    let address = args.address.as_deref().unwrap_or_default();
    if args.listen {
        return SocketChannel::listen(address).map_err(transport);
    }
    let deadline = Instant::now() + DIAL_PATIENCE;
    loop {
        match SocketChannel::dial(address) {
            Err(TransportError::Connect { .. }) if Instant::now() < deadline => thread::sleep(DIAL_RETRY),
            other => return other.map_err(transport),
        }
    }
}

fn write_transcript(path: &Path, transcript: &Transcript) -> Result<(), CliError> {
    fs::write(path, transcript.to_text()).map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

fn bob_transcript_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".bob");
    PathBuf::from(s)
}

type Session<T> = Option<Result<T, SessionError>>;
type Sessions<A, B> = (Session<<A as Role>::Output>, Session<<B as Role>::Output>);

/// Runs both roles (memory mode) or the local one (socket mode) and writes transcripts.
fn execute<A, B>(args: &RunArgs, alice: A, bob: B) -> Result<Sessions<A, B>, CliError>
where
    A: Role,
    B: Role + Send + 'static,
    B::Output: Send,
{
    match args.mode {
        Mode::Memory => {
            let (mut ca, mut cb) = memory_channel_pair();
            let handle = thread::spawn(move || {
                let mut t = Transcript::new();
                let r = drive_session(bob, &mut cb, &mut t);
                cb.close();
                (r, t)
            });
            let mut ta = Transcript::new();
            let ra = drive_session(alice, &mut ca, &mut ta);
            ca.close();
            let (rb, tb) = handle.join().expect("bob thread panicked");
            if let Some(path) = &args.transcript {
                write_transcript(path, &ta)?;
                write_transcript(&bob_transcript_path(path), &tb)?;
            }
            Ok((Some(ra), Some(rb)))
        }
        Mode::Socket => {
            let mut channel = connect(args)?;
            let mut t = Transcript::new();
            let result = match args.role {
                Some(RoleName::Alice) => (Some(drive_session(alice, &mut channel, &mut t)), None),
                _ => (None, Some(drive_session(bob, &mut channel, &mut t))),
            };
            channel.close();
            if let Some(path) = &args.transcript {
                write_transcript(path, &t)?;
            }
            Ok(result)
        }
    }
}

/// Prefers the error that explains the failure over the peer's view of it.
fn first_error(errors: Vec<SessionError>) -> Option<SessionError> {
    let rank = |e: &SessionError| match e {
        SessionError::Protocol(_) => 0,
        SessionError::Transport(_) => 1,
        SessionError::PeerAborted(_) => 2,
    };
    errors.into_iter().min_by_key(rank)
}

fn split<T>(session: Session<T>, errors: &mut Vec<SessionError>) -> Option<T> {
    match session? {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push(e);
            None
        }
    }
}

fn finish(errors: Vec<SessionError>) -> Result<(), CliError> {
    match first_error(errors) {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn describe_mutual(name: &str, o: &MutualOutcome, raw: bool) -> String {
    let matched = if o.matched { "yes" } else { "no" };
    let secret = match &o.peer_secret {
        PeerSecret::Received(s) => format!("received {}", show_secret(s, raw)),
        PeerSecret::NotReceived => "not received".to_string(),
        PeerSecret::Recovered(s) => format!("recovered after peer withdrew {}", show_secret(s, raw)),
    };
    let withdrew = if o.withdrew { " (withdrew)" } else { "" };
    format!("{name}: matched={matched} peer-secret: {secret}{withdrew}")
}

fn run_mutual(params: &GroupParams, args: &RunArgs, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut alice_choices = MutualChoices::random(params, &mut rng);
    let mut bob_choices = MutualChoices::random(params, &mut rng);
    let (seed_a, seed_b) = (rng.next_u64(), rng.next_u64());

    let (ga, gb) = forced_roots(params, args)?;
    if let Some(g) = ga {
        alice_choices.send_root = g;
        alice_choices.recv_root = g;
    }
    if let Some(g) = gb {
        bob_choices.send_root = g;
        bob_choices.recv_root = g;
    }
    if let Some(e) = forced_exponents(params, args, 3)? {
        for c in [&mut alice_choices, &mut bob_choices] {
            c.send_n1 = e[0].clone();
            c.send_n2 = e[1].clone();
            c.recv_n = e[2].clone();
        }
    }

    let mut alice = MutualParty::new(params, Side::Alice, alice_choices, party_secret(args, RoleName::Alice)?, seed_a);
    let mut bob = MutualParty::new(params, Side::Bob, bob_choices, party_secret(args, RoleName::Bob)?, seed_b);
    if args.withdraw {
        match (args.mode, args.role) {
            (Mode::Socket, Some(RoleName::Alice)) => alice = alice.withdraw_before_final(),
            _ => bob = bob.withdraw_before_final(),
        }
    }

    let (ra, rb) = execute(args, alice, bob)?;
    let mut errors = Vec::new();
    if let Some(a) = split(ra, &mut errors) {
        writeln!(out, "{}", describe_mutual("alice", &a, args.raw))?;
    }
    if let Some(b) = split(rb, &mut errors) {
        writeln!(out, "{}", describe_mutual("bob", &b, args.raw))?;
    }
    finish(errors)
}

fn run_ot(params: &GroupParams, args: &RunArgs, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    no_forced_roots(args)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let [mut n_a1, mut n_a2, mut n_b, mut n_b1] = random_exponents(params, &mut rng);
    if let Some(e) = forced_exponents(params, args, 4)? {
        [n_a1, n_a2, n_b, n_b1] = [e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone()];
        if !is_unit(&n_b1, &params.order()) {
            return Err(CliError::config(format!("--force-exponents: nB1={n_b1} is not invertible mod p-1")));
        }
    }
    let (s1, s2) = if plays(args, RoleName::Alice) {
        (required_secret("--secret1", &args.secret1)?, required_secret("--secret2", &args.secret2)?)
    } else {
        (Vec::new(), Vec::new())
    };
    let choice = match (plays(args, RoleName::Bob), args.choice) {
        (true, None) => return Err(CliError::config("--choice 1|2 is required")),
        (_, Some(2)) => RootChoice::Second,
        _ => RootChoice::First,
    };
    let alice = OtSenderRole::new(params, s1, s2, n_a1, n_a2);
    let bob = OtReceiverRole::new(params, choice, n_b, n_b1);

    let (ra, rb) = execute(args, alice, bob)?;
    let mut errors = Vec::new();
    if split(ra, &mut errors).is_some() {
        writeln!(out, "alice: sent both secrets")?;
    }
    if let Some(b) = split(rb, &mut errors) {
        let index = if b.choice == RootChoice::First { 1 } else { 2 };
        writeln!(out, "bob: secret {index}: {}", show_secret(&b.secret, args.raw))?;
    }
    finish(errors)
}

fn winner_name(w: Winner) -> &'static str {
    match w {
        Winner::BobWins => "bob",
        Winner::AliceWins => "alice",
    }
}

fn run_coinflip(params: &GroupParams, args: &RunArgs, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut ga = RootChoice::random(&mut rng);
    let mut gb = RootChoice::random(&mut rng);
    let [mut n_a1, mut n_a2, mut n_b, _] = random_exponents(params, &mut rng);
    let (fa, fb) = forced_roots(params, args)?;
    ga = fa.unwrap_or(ga);
    gb = fb.unwrap_or(gb);
    if let Some(e) = forced_exponents(params, args, 3)? {
        [n_a1, n_a2, n_b] = [e[0].clone(), e[1].clone(), e[2].clone()];
    }
    let alice = CoinFlipAlice::new(params, ga, n_a1, n_a2);
    let bob = CoinFlipBob::new(params, gb, n_b);

    let (ra, rb) = execute(args, alice, bob)?;
    let mut errors = Vec::new();
    let mut unverified = false;
    if let Some(a) = split(ra, &mut errors) {
        writeln!(out, "alice: winner {}", winner_name(a.winner))?;
    }
    if let Some(b) = split(rb, &mut errors) {
        let check = if b.verified { "verified" } else { "FAILED verification" };
        writeln!(out, "bob: declared {}, winner {}, reveal {check}", b.declared, winner_name(b.winner))?;
        unverified = !b.verified;
    }
    finish(errors)?;
    if unverified {
        return Err(CliError::Violation("alice's reveal does not match the transcript".into()));
    }
    Ok(())
}

fn run_zkp(params: &GroupParams, args: &RunArgs, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    no_forced_roots(args)?;
    if args.vectors.force_exponents.is_some() {
        return Err(CliError::config("--force-exponents does not apply to zkp"));
    }
    let e = args.password.as_deref().map(|pw| secret_from_password(params, pw));
    let given_y = args.public_y.as_deref().map(|v| parse_nat("--public-y", v)).transpose()?;
    let statement = |y: BigNat| ZkPublic::new(params, y).map_err(|err| CliError::config(format!("--public-y: {err}")));
    let derived_y = e.as_ref().map(|e| params.pow_x(e));

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (seed_p, seed_v) = (rng.next_u64(), rng.next_u64());

    let prover_y = derived_y.clone().or(given_y.clone());
    let verifier_y = given_y.or(derived_y);
    let missing = || CliError::config("zkp needs --password or --public-y");

    let strategy: Box<dyn ProverStrategy + Send> = match (&e, args.imposter) {
        (_, true) => Box::new(ImposterProver::new()),
        (Some(e), false) => Box::new(HonestProver::new(e.clone())),
        (None, false) if plays(args, RoleName::Alice) => {
            return Err(CliError::config("an honest prover needs --password (or pass --imposter)"))
        }
        (None, false) => Box::new(ImposterProver::new()),
    };
    let prover_public = match prover_y {
        Some(y) => statement(y)?,
        None if plays(args, RoleName::Alice) => return Err(missing()),
        None => ZkPublic::for_secret(params, &BigNat::from(1u8)),
    };
    let verifier_public = match verifier_y {
        Some(y) => statement(y)?,
        None if plays(args, RoleName::Bob) => return Err(missing()),
        None => prover_public.clone(),
    };
    let prover = ProverRole::new(params, prover_public, strategy, args.rounds, seed_p);
    let verifier = VerifierRole::new(params, verifier_public, args.rounds, seed_v);

    let describe = |o: &ZkOutcome| {
        if o.accepted {
            format!("accepted after {} rounds", o.rounds)
        } else {
            format!("rejected in round {}", o.rounds)
        }
    };
    let (rp, rv) = execute(args, prover, verifier)?;
    let mut errors = Vec::new();
    if let Some(p) = split(rp, &mut errors) {
        writeln!(out, "prover: {}", describe(&p))?;
    }
    if let Some(v) = split(rv, &mut errors) {
        writeln!(out, "verifier: {}", describe(&v))?;
    }
    finish(errors)
}
