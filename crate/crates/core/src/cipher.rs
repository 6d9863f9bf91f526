//! The keyed confirmation function `f` and the key-claim masking step.
//!
//! `f(m, k) = m XOR keystream(k)`, where block `i` of the keystream is
//! `SHA-256(encode(k) || context || i)` with `i` a big-endian `u64`. Keys
//! are encoded big-endian and zero-padded to the byte width of `p`.
//! Observing `(m, f(m, k))` gives the keystream, not the key.

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::error::ProtocolError;
use crate::numtheory::BigNat;
use crate::params::GroupParams;

/// Per-purpose context strings. Each protocol phase uses its own.
pub mod context {
    pub const CONFIRM: &[u8] = b"confirm";
    pub const SECRET: &[u8] = b"secret";
    pub const MASK: &[u8] = b"mask";
    pub const OT_SECRET_1: &[u8] = b"ot-secret-1";
    pub const OT_SECRET_2: &[u8] = b"ot-secret-2";
}

/// Big-endian encoding of `value`, left-padded with zeros to `width` bytes.
///
/// # Panics
/// If `value` does not fit in `width` bytes.
pub fn encode_fixed(value: &BigNat, width: usize) -> Vec<u8> {
    let raw = if value == &BigUint::ZERO {
        Vec::new()
    } else {
        value.to_bytes_be()
    };
    assert!(raw.len() <= width, "value wider than {width} bytes");
    let mut out = vec![0u8; width - raw.len()];
    out.extend_from_slice(&raw);
    out
}

/// A group element used as a symmetric key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymmetricKey {
    value: BigNat,
    width: usize,
}

impl SymmetricKey {
    pub fn new(value: BigNat, params: &GroupParams) -> Result<Self, ProtocolError> {
        params.check_element(&value)?;
        Ok(SymmetricKey {
            value,
            width: params.element_width(),
        })
    }

    pub fn value(&self) -> &BigNat {
        &self.value
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        encode_fixed(&self.value, self.width)
    }
}

/// `U = K` when the claimant holds the matching key, `U = !K` otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KeyClaim(Vec<u8>);

impl KeyClaim {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

fn stream(material: &[u8], context: &[u8], len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    let mut block = 0u64;
    while out.len() < len {
        let digest = Sha256::new()
            .chain_update(material)
            .chain_update(context)
            .chain_update(block.to_be_bytes())
            .finalize();
        let take = (len - out.len()).min(digest.len());
        out.extend_from_slice(&digest[..take]);
        block += 1;
    }
    out
}

fn xor_in_place(data: &mut [u8], pad: &[u8]) {
    for (d, p) in data.iter_mut().zip(pad) {
        *d ^= p;
    }
}

pub fn keystream(key: &SymmetricKey, context: &[u8], len: usize) -> Vec<u8> {
    stream(&key.to_bytes(), context, len)
}

pub fn f_encrypt(m: &[u8], key: &SymmetricKey, context: &[u8]) -> Vec<u8> {
    let mut out = m.to_vec();
    xor_in_place(&mut out, &keystream(key, context, m.len()));
    out
}

/// Inverse of [`f_encrypt`]; the XOR stream is its own inverse.
pub fn f_decrypt(c: &[u8], key: &SymmetricKey, context: &[u8]) -> Vec<u8> {
    f_encrypt(c, key, context)
}

pub fn make_claim(key: &SymmetricKey, matched: bool) -> KeyClaim {
    let mut bytes = key.to_bytes();
    if !matched {
        bytes.iter_mut().for_each(|b| *b = !*b);
    }
    KeyClaim(bytes)
}

/// `secret XOR stream(claim)`. Applying it twice with the same claim is the identity.
pub fn mask_secret(secret: &[u8], claim: &KeyClaim) -> Vec<u8> {
    let mut out = secret.to_vec();
    xor_in_place(&mut out, &stream(claim.as_bytes(), context::MASK, secret.len()));
    out
}
