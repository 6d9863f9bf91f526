//! The agreed group parameters `(p, x, c, g1, g2)` and their text file format.
//!
//! `p` is always a safe prime `2q + 1`, which makes the primitive-root test
//! for `x` two exponentiations against the factors `{2, q}`.
//!
//! File format, one `key=value` per line:
//!
//! ```text
//! # comment
//! p=23
//! x=5
//! c=9
//! g1=3
//! g2=20
//! q=11
//! ```
//!
//! Keys are exactly `p x c g1 g2 q`, in any order, values in decimal.
//! Whitespace around keys and values is ignored.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::ProtocolError;
use crate::numtheory::{
    is_primitive_root, is_probable_prime, rand_below, random_safe_prime, sqrt_mod_prime, BigNat,
    DEFAULT_MR_ROUNDS,
};

/// Smallest accepted size for generated parameters.
pub const MIN_BITS: u64 = 16;

/// Which of the two square roots of `c` a party picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootChoice {
    First,
    Second,
}

impl RootChoice {
    pub fn other(self) -> Self {
        match self {
            RootChoice::First => RootChoice::Second,
            RootChoice::Second => RootChoice::First,
        }
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        if rng.next_u32() & 1 == 0 {
            RootChoice::First
        } else {
            RootChoice::Second
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupParams {
    /// Safe prime modulus.
    pub p: BigNat,
    /// Primitive root mod `p`.
    pub x: BigNat,
    /// Quadratic residue with roots `g1` and `g2`.
    pub c: BigNat,
    pub g1: BigNat,
    pub g2: BigNat,
    /// `(p - 1) / 2`, prime.
    pub q: BigNat,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("p is not prime")]
    PNotPrime,
    #[error("q is not prime")]
    QNotPrime,
    #[error("p != 2q + 1")]
    NotSafePrime,
    #[error("not a primitive root")]
    NotPrimitiveRoot,
    #[error("c is not a quadratic residue")]
    CNotResidue,
    #[error("g1² ≠ c")]
    G1NotRoot,
    #[error("g2² ≠ c")]
    G2NotRoot,
    #[error("g1 + g2 ≠ p")]
    RootsNotComplementary,
    #[error("roots not ordered 1 < g1 < g2 < p-1")]
    RootOrder,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("line {line}: malformed field `{field}`: {reason}")]
    MalformedField {
        line: usize,
        field: String,
        reason: &'static str,
    },
    #[error("invalid parameters: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("parameter size {0} bits is below the minimum of {MIN_BITS}")]
    TooFewBits(u64),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl GroupParams {
    /// The 23-element toy group: `p = 23, x = 5, c = 9` with roots 3 and 20.
    pub fn p23() -> Self {
        GroupParams {
            p: 23u8.into(),
            x: 5u8.into(),
            c: 9u8.into(),
            g1: 3u8.into(),
            g2: 20u8.into(),
            q: 11u8.into(),
        }
    }

    /// Order of the multiplicative group; every exponent lives mod this.
    pub fn order(&self) -> BigNat {
        &self.p - 1u8
    }

    /// Byte width of a group element in the fixed-width encoding.
    pub fn element_width(&self) -> usize {
        self.p.bits().div_ceil(8) as usize
    }

    pub fn root(&self, choice: RootChoice) -> &BigNat {
        match choice {
            RootChoice::First => &self.g1,
            RootChoice::Second => &self.g2,
        }
    }

    pub fn choice_of(&self, root: &BigNat) -> Option<RootChoice> {
        if root == &self.g1 {
            Some(RootChoice::First)
        } else if root == &self.g2 {
            Some(RootChoice::Second)
        } else {
            None
        }
    }

    pub fn is_element(&self, v: &BigNat) -> bool {
        !v.is_zero() && v < &self.p
    }

    pub fn check_element(&self, v: &BigNat) -> Result<(), ProtocolError> {
        if self.is_element(v) {
            Ok(())
        } else {
            Err(ProtocolError::MalformedElement(v.clone()))
        }
    }

    /// `x^e mod p`.
    pub fn pow_x(&self, e: &BigNat) -> BigNat {
        self.x.modpow(e, &self.p)
    }

    /// SHA-256 of the serialized form. Carried in the session hello.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_string().as_bytes()).into()
    }
}

/// Fresh safe-prime parameters with a `bits`-bit modulus.
pub fn generate_params<R: RngCore + ?Sized>(
    bits: u64,
    rng: &mut R,
) -> Result<GroupParams, ParamsError> {
    if bits < MIN_BITS {
        return Err(ParamsError::TooFewBits(bits));
    }
    let (p, q) = random_safe_prime(bits, rng);
    let factors = [BigNat::from(2u8), q.clone()];
    let span = &p - 3u8;
    let x = loop {
        let candidate = rand_below(&span, rng) + 2u8;
        if is_primitive_root(&candidate, &p, &factors) {
            break candidate;
        }
    };
    // g1 ∈ [2, q] keeps g1 < g2 = p - g1 and excludes the roots of 1
    let g1 = rand_below(&(&q - 1u8), rng) + 2u8;
    let g2 = &p - &g1;
    let c = (&g1 * &g1) % &p;
    Ok(GroupParams { p, x, c, g1, g2, q })
}

/// Checks every invariant and reports all violations found.
pub fn validate_params(params: &GroupParams) -> Result<(), Vec<Violation>> {
    let GroupParams { p, x, c, g1, g2, q } = params;
    let mut out = Vec::new();

    let p_prime = is_probable_prime(p, DEFAULT_MR_ROUNDS);
    if !p_prime {
        out.push(Violation::PNotPrime);
    }
    if !is_probable_prime(q, DEFAULT_MR_ROUNDS) {
        out.push(Violation::QNotPrime);
    }
    if p != &((q << 1) + 1u8) {
        out.push(Violation::NotSafePrime);
    }
    if !is_primitive_root(x, p, &[BigNat::from(2u8), q.clone()]) || x >= p {
        out.push(Violation::NotPrimitiveRoot);
    }
    if p_prime {
        match sqrt_mod_prime(c, p) {
            Ok((r1, r2)) => {
                if (r1 != *g1 && r2 != *g1) || c >= p {
                    out.push(Violation::G1NotRoot);
                }
                if (r1 != *g2 && r2 != *g2) || c >= p {
                    out.push(Violation::G2NotRoot);
                }
            }
            Err(_) => out.push(Violation::CNotResidue),
        }
    } else {
        if p.is_zero() || (g1 * g1) % p != *c {
            out.push(Violation::G1NotRoot);
        }
        if p.is_zero() || (g2 * g2) % p != *c {
            out.push(Violation::G2NotRoot);
        }
    }
    if &(g1 + g2) != p {
        out.push(Violation::RootsNotComplementary);
    }
    let ordered = g1 > &BigNat::one() && g1 < g2 && p > &BigNat::one() && g2 < &(p - 1u8);
    if !ordered {
        out.push(Violation::RootOrder);
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

pub fn serialize_params(params: &GroupParams) -> String {
    params.to_string()
}

/// Parses the text format and validates the result.
pub fn parse_params(text: &str) -> Result<GroupParams, ParamsError> {
    const KEYS: [&str; 6] = ["p", "x", "c", "g1", "g2", "q"];
    let mut values: [Option<BigNat>; 6] = Default::default();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let malformed = |field: &str, reason| ParamsError::MalformedField {
            line,
            field: field.to_string(),
            reason,
        };
        let (key, value) = trimmed.split_once('=').ok_or_else(|| malformed(trimmed, "expected key=value"))?;
        let key = key.trim();
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| malformed(key, "unknown key"))?;
        if values[slot].is_some() {
            return Err(malformed(key, "duplicate key"));
        }
        let value = value.trim();
        if value.is_empty() || !value.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed(key, "expected a decimal integer"));
        }
        values[slot] = Some(BigNat::parse_bytes(value.as_bytes(), 10).ok_or_else(|| malformed(key, "expected a decimal integer"))?);
    }

    let mut take = |i: usize| {
        values[i].take().ok_or_else(|| ParamsError::MalformedField {
            line: last_line + 1,
            field: KEYS[i].to_string(),
            reason: "missing",
        })
    };
    let params = GroupParams {
        p: take(0)?,
        x: take(1)?,
        c: take(2)?,
        g1: take(3)?,
        g2: take(4)?,
        q: take(5)?,
    };
    validate_params(&params).map_err(ParamsError::Invalid)?;
    Ok(params)
}

impl fmt::Display for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p={}", self.p)?;
        writeln!(f, "x={}", self.x)?;
        writeln!(f, "c={}", self.c)?;
        writeln!(f, "g1={}", self.g1)?;
        writeln!(f, "g2={}", self.g2)?;
        writeln!(f, "q={}", self.q)
    }
}

impl FromStr for GroupParams {
    type Err = ParamsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_params(s)
    }
}
