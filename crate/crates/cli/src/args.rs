use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "dhot", version, about = "Oblivious key exchange, oblivious transfer, coin flipping and identification over Z_p")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate and validate a safe-prime parameter set.
    Params(ParamsArgs),
    /// Run one protocol session.
    Run(Box<RunArgs>),
    /// Run many seeded sessions in-process and report frequencies.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    Mutual,
    Ot,
    Coinflip,
    Zkp,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Mutual => "mutual",
            Protocol::Ot => "ot",
            Protocol::Coinflip => "coinflip",
            Protocol::Zkp => "zkp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Memory,
    Socket,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoleName {
    /// Mutual: first sender. OT: holder of both secrets. Coin flip: adjudicator. ZKP: prover.
    Alice,
    /// Mutual: first receiver. OT: chooser. Coin flip: declarer. ZKP: verifier.
    Bob,
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    /// Bit length of the safe prime p.
    #[arg(long)]
    pub bits: u64,
    /// Output file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Where the public parameters come from.
#[derive(Debug, Args)]
#[group(required = false, multiple = false)]
pub struct ParamsSource {
    /// Parameter file written by `dhot params`.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Built-in toy parameters p=23, x=5, c=9, g1=3, g2=20.
    #[arg(long)]
    pub toy: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub protocol: Protocol,
    #[command(flatten)]
    pub source: ParamsSource,
    #[arg(long, value_enum, default_value = "memory")]
    pub mode: Mode,
    /// Local role in socket mode.
    #[arg(long, value_enum)]
    pub role: Option<RoleName>,
    /// host:port to dial, or to bind with --listen.
    #[arg(long)]
    pub address: Option<String>,
    /// Bind --address and wait for the peer instead of dialing.
    #[arg(long)]
    pub listen: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Alice's secret in memory mode (text, or @path).
    #[arg(long)]
    pub secret_a: Option<String>,
    /// Bob's secret in memory mode (text, or @path).
    #[arg(long)]
    pub secret_b: Option<String>,
    /// The local party's secret in socket mode (text, or @path).
    #[arg(long)]
    pub secret: Option<String>,
    /// First oblivious-transfer secret (text, or @path).
    #[arg(long)]
    pub secret1: Option<String>,
    /// Second oblivious-transfer secret (text, or @path).
    #[arg(long)]
    pub secret2: Option<String>,
    /// Which oblivious-transfer secret Bob asks for.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub choice: Option<u8>,
    /// Identification rounds.
    #[arg(short = 't', long = "rounds", default_value_t = 10)]
    pub rounds: u32,
    /// Prove without knowing the secret exponent.
    #[arg(long)]
    pub imposter: bool,
    /// Password the identification secret is derived from.
    #[arg(long)]
    pub password: Option<String>,
    /// Public value y, decimal, for a verifier or imposter without the password.
    #[arg(long)]
    pub public_y: Option<String>,
    /// Walk away instead of sending the final ciphertext (mutual; Bob in memory mode).
    #[arg(long)]
    pub withdraw: bool,
    /// Write the session transcript here (memory mode: Alice's; Bob's goes to PATH.bob).
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    /// Print secrets as text instead of hex.
    #[arg(long)]
    pub raw: bool,
    #[command(flatten)]
    pub vectors: TestVectors,
}

/// Fixed choices for reproducing worked examples.
#[derive(Debug, Args, Default)]
pub struct TestVectors {
    /// Enable the --force-* flags.
    #[arg(long)]
    pub test_vectors: bool,
    /// Alice's root (g1 or g2 as a number).
    #[arg(long, requires = "test_vectors")]
    pub force_ga: Option<String>,
    /// Bob's root (g1 or g2 as a number).
    #[arg(long, requires = "test_vectors")]
    pub force_gb: Option<String>,
    /// Exponents nA1,nA2,nB (OT: nA1,nA2,nB,nB1).
    #[arg(long, requires = "test_vectors", value_delimiter = ',')]
    pub force_exponents: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub protocol: Protocol,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Generate fresh parameters of this size from the seed.
    #[arg(long, default_value_t = 256, conflicts_with_all = ["params", "toy"])]
    pub bits: u64,
    #[command(flatten)]
    pub source: ParamsSource,
    /// Write one CSV row per trial here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Identification rounds per trial.
    #[arg(short = 't', long = "rounds", default_value_t = 10)]
    pub rounds: u32,
    /// Simulate a prover without the secret.
    #[arg(long)]
    pub imposter: bool,
}
