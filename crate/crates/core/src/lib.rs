//! Oblivious key exchange over `Z_p` and the protocols built on it.
//!
//! The core idea: both parties agree on a prime `p`, a primitive root `x`
//! and a quadratic residue `c` with square roots `g1`, `g2`. Each side
//! secretly picks one of the roots; the Diffie-Hellman style exchange in
//! [`mutual`] gives the receiver the sender's key exactly when the picks
//! coincide, so the transfer succeeds with probability one half and the
//! sender cannot tell which way it went.
//!
//! On top of that exchange this crate provides mutual exchange of secrets
//! ([`mutual`]), 1-out-of-2 oblivious transfer ([`ot12`]), coin flipping
//! ([`coinflip`]) and a cut-and-choose discrete-log identification protocol
//! ([`zkp`]). [`session`] carries all of them over a length-prefixed binary
//! framing on in-memory or TCP channels.

pub mod cipher;
pub mod coinflip;
pub mod error;
pub mod mutual;
pub mod numtheory;
pub mod ot12;
pub mod params;
pub mod session;
pub mod zkp;

pub use error::ProtocolError;
pub use numtheory::BigNat;
pub use params::{GroupParams, RootChoice};

