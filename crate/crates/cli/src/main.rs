mod args;
mod common;
mod error;
mod run;
mod simulate;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use dhot_core::params::{generate_params, serialize_params};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use args::{Cli, Command, ParamsArgs};
use common::resolve_seed;
use error::{CliError, EXIT_CONFIG, EXIT_OK};

fn cmd_params(args: &ParamsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let seed = resolve_seed(args.seed);
    let params = generate_params(args.bits, &mut ChaCha20Rng::seed_from_u64(seed)).map_err(|e| CliError::config(e.to_string()))?;
    let text = serialize_params(&params);
    match &args.out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
            writeln!(out, "wrote {} ({}-bit p, {} decimal digits, seed {seed})", path.display(), params.p.bits(), params.p.to_string().len())?;
        }
        None => write!(out, "{text}")?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Params(a) => cmd_params(a, &mut out),
        Command::Run(a) => run::cmd_run(a, &mut out),
        Command::Simulate(a) => simulate::cmd_simulate(a, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
