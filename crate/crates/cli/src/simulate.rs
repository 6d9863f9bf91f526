use std::io::Write;
use std::path::Path;

use dhot_core::coinflip::{CoinFlipAlice, CoinFlipBob, Winner};
use dhot_core::mutual::{MutualParty, PeerSecret, Side};
use dhot_core::numtheory::BigNat;
use dhot_core::ot12::{OtReceiverRole, OtSenderRole};
use dhot_core::params::{generate_params, GroupParams, RootChoice};
use dhot_core::session::{drive_pair, SessionError};
use dhot_core::zkp::{secret_from_password, HonestProver, ImposterProver, ProverRole, ProverStrategy, VerifierRole, ZkPublic};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::args::{Protocol, SimulateArgs};
use crate::common::{load_params, resolve_seed};
use crate::error::CliError;

const SECRET_A: &[u8] = b"alice's secret";
const SECRET_B: &[u8] = b"bob's secret";
const SECRET_1: &[u8] = b"first secret";
const SECRET_2: &[u8] = b"second secret";
const PASSWORD: &str = "correct horse battery staple";

/// One CSV row; `None` fields are left empty.
#[derive(Debug, Default)]
struct Row {
    matched: Option<u8>,
    bob_wins: Option<bool>,
    rounds: Option<u32>,
    accepted: Option<bool>,
}

/// Running tallies printed as rates.
#[derive(Debug, Default)]
struct Tally {
    counts: Vec<(&'static str, u64)>,
}

impl Tally {
    fn add(&mut self, name: &'static str, hit: bool) {
        match self.counts.iter_mut().find(|(n, _)| *n == name) {
            Some((_, c)) => *c += hit as u64,
            None => self.counts.push((name, hit as u64)),
        }
    }

    fn report(&self, trials: u64, out: &mut dyn Write) -> std::io::Result<()> {
        let n = trials as f64;
        for (name, count) in &self.counts {
            let rate = *count as f64 / n;
            let se = (rate * (1.0 - rate) / n).sqrt();
            writeln!(out, "{name:<28} {count:>8}/{trials}  rate {rate:.4} ± {se:.4}")?;
        }
        Ok(())
    }
}

fn session<T>(r: Result<T, SessionError>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Violation(format!("simulated session failed: {e}")))
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::config("--trials must be at least 1"));
    }
    let seed = resolve_seed(args.seed);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let params = match load_params(&args.source)? {
        Some(p) => p,
        None => generate_params(args.bits, &mut rng).map_err(|e| CliError::config(e.to_string()))?,
    };
    let mut writer = match &args.csv {
        Some(path) => Some(open_csv(path)?),
        None => None,
    };

    writeln!(out, "protocol {} trials {} seed {seed} p {} bits", args.protocol.name(), args.trials, params.p.bits())?;
    let zk = zk_statement(&params);
    let mut tally = Tally::default();
    let mut total_rounds = 0u64;
    for trial in 0..args.trials {
        let (seed_a, seed_b) = (rng.next_u64(), rng.next_u64());
        let row = match args.protocol {
            Protocol::Mutual => mutual_trial(&params, seed_a, seed_b, &mut tally)?,
            Protocol::Ot => ot_trial(&params, rng.gen(), seed_a, seed_b, &mut tally)?,
            Protocol::Coinflip => coinflip_trial(&params, seed_a, seed_b, &mut tally)?,
            Protocol::Zkp => zkp_trial(&params, &zk, args, seed_a, seed_b, &mut tally)?,
        };
        total_rounds += u64::from(row.rounds.unwrap_or(0));
        if let Some(w) = writer.as_mut() {
            write_row(w, trial, args.protocol, &row)?;
        }
    }
    tally.report(args.trials, out)?;
    if args.protocol == Protocol::Zkp {
        writeln!(out, "{:<28} {:.3}", "mean rounds", total_rounds as f64 / args.trials as f64)?;
    }
    if let Some(mut w) = writer {
        w.flush()?;
    }
    Ok(())
}

fn open_csv(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
    w.write_record(["trial", "protocol", "matched", "bob_wins", "rounds", "accepted"])
        .map_err(csv_error)?;
    Ok(w)
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(e.into())
}

fn write_row(w: &mut csv::Writer<std::fs::File>, trial: u64, protocol: Protocol, row: &Row) -> Result<(), CliError> {
    fn opt<T: ToString>(v: Option<T>) -> String {
        v.map(|v| v.to_string()).unwrap_or_default()
    }
    let flag = |b: Option<bool>| opt(b.map(u8::from));
    w.write_record([
        trial.to_string(),
        protocol.name().to_string(),
        opt(row.matched),
        flag(row.bob_wins),
        opt(row.rounds),
        flag(row.accepted),
    ])
    .map_err(csv_error)
}

fn mutual_trial(params: &GroupParams, seed_a: u64, seed_b: u64, tally: &mut Tally) -> Result<Row, CliError> {
    let out = drive_pair(
        MutualParty::random(params, Side::Alice, SECRET_A.to_vec(), seed_a),
        MutualParty::random(params, Side::Bob, SECRET_B.to_vec(), seed_b),
    );
    let alice = session(out.first)?;
    let bob = session(out.second)?;
    let a_gets = alice.got_peer_secret();
    let b_gets = bob.got_peer_secret();
    tally.add("alice->bob key matched", bob.matched);
    tally.add("bob->alice key matched", alice.matched);
    tally.add("bob got alice's secret", b_gets);
    tally.add("alice got bob's secret", a_gets);
    tally.add("both got secrets", a_gets && b_gets);
    tally.add("neither got a secret", !a_gets && !b_gets);
    if let PeerSecret::Received(s) = &bob.peer_secret {
        if s != SECRET_A {
            return Err(CliError::Violation("bob decrypted a wrong secret".into()));
        }
    }
    Ok(Row {
        matched: Some(u8::from(alice.matched) + u8::from(bob.matched)),
        ..Row::default()
    })
}

fn ot_trial(params: &GroupParams, second: bool, seed_a: u64, seed_b: u64, tally: &mut Tally) -> Result<Row, CliError> {
    let choice = if second { RootChoice::Second } else { RootChoice::First };
    let out = drive_pair(
        OtSenderRole::random(params, SECRET_1.to_vec(), SECRET_2.to_vec(), seed_a),
        OtReceiverRole::random(params, choice, seed_b),
    );
    session(out.first)?;
    let bob = session(out.second)?;
    let expected = if second { SECRET_2 } else { SECRET_1 };
    tally.add("bob chose secret 2", second);
    tally.add("bob got the chosen secret", bob.secret == expected);
    Ok(Row::default())
}

fn coinflip_trial(params: &GroupParams, seed_a: u64, seed_b: u64, tally: &mut Tally) -> Result<Row, CliError> {
    let out = drive_pair(CoinFlipAlice::random(params, seed_a), CoinFlipBob::random(params, seed_b));
    let alice = session(out.first)?;
    let bob = session(out.second)?;
    let bob_wins = bob.winner == Winner::BobWins;
    tally.add("bob wins", bob_wins);
    tally.add("parties agree on winner", alice.winner == bob.winner);
    tally.add("reveal verified", bob.verified);
    Ok(Row {
        bob_wins: Some(bob_wins),
        ..Row::default()
    })
}

fn zk_statement(params: &GroupParams) -> (BigNat, ZkPublic) {
    let e = secret_from_password(params, PASSWORD);
    let public = ZkPublic::for_secret(params, &e);
    (e, public)
}

fn zkp_trial(
    params: &GroupParams,
    (e, public): &(BigNat, ZkPublic),
    args: &SimulateArgs,
    seed_a: u64,
    seed_b: u64,
    tally: &mut Tally,
) -> Result<Row, CliError> {
    let strategy: Box<dyn ProverStrategy + Send> = if args.imposter {
        Box::new(ImposterProver::new())
    } else {
        Box::new(HonestProver::new(e.clone()))
    };
    let out = drive_pair(
        ProverRole::new(params, public.clone(), strategy, args.rounds, seed_a),
        VerifierRole::new(params, public.clone(), args.rounds, seed_b),
    );
    session(out.first)?;
    let verdict = session(out.second)?;
    tally.add("accepted", verdict.accepted);
    Ok(Row {
        rounds: Some(verdict.rounds),
        accepted: Some(verdict.accepted),
        ..Row::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_reports_rate_and_standard_error() {
        let mut t = Tally::default();
        for i in 0..4 {
            t.add("hit", i % 2 == 0);
        }
        let mut out = Vec::new();
        t.report(4, &mut out).unwrap();
        let line = String::from_utf8(out).unwrap();
        assert!(line.contains("2/4") && line.contains("rate 0.5000 ± 0.2500"), "{line}");
    }

    #[test]
    fn every_trial_verifies_on_toy_parameters() {
        let p = GroupParams::p23();
        let mut t = Tally::default();
        for s in 0..20 {
            ot_trial(&p, s % 2 == 0, s, s + 100, &mut t).unwrap();
            coinflip_trial(&p, s, s + 100, &mut t).unwrap();
        }
        for (name, count) in &t.counts {
            if !name.contains("chose") && !name.contains("wins") {
                assert_eq!(*count, 20, "{name}");
            }
        }
    }
}
