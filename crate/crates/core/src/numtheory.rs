//! Modular arithmetic over arbitrary-precision naturals.
//!
//! Everything here is a pure function of its arguments (plus an explicit
//! random source where one is needed), so it can be called from any thread.
//! None of it is constant-time.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Arbitrary-precision natural number. All group elements and exponents use it.
pub type BigNat = BigUint;

/// Miller–Rabin rounds used when generating parameters.
pub const DEFAULT_MR_ROUNDS: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumberError {
    #[error("modulus must be at least 2")]
    InvalidModulus,
    #[error("{value} is not invertible modulo {modulus} (gcd {gcd})")]
    NotInvertible {
        value: BigNat,
        modulus: BigNat,
        gcd: BigNat,
    },
    #[error("{0} is not a quadratic residue")]
    NotAResidue(BigNat),
    #[error("{0} is not an odd prime")]
    InvalidPrime(BigNat),
}

/// `base^exp mod modulus`.
pub fn mod_exp(base: &BigNat, exp: &BigNat, modulus: &BigNat) -> Result<BigNat, NumberError> {
    if modulus < &BigNat::from(2u8) {
        return Err(NumberError::InvalidModulus);
    }
    Ok(base.modpow(exp, modulus))
}

/// Multiplicative inverse of `a` modulo `modulus`, by the extended Euclidean algorithm.
pub fn mod_inv(a: &BigNat, modulus: &BigNat) -> Result<BigNat, NumberError> {
    if modulus < &BigNat::from(2u8) {
        return Err(NumberError::InvalidModulus);
    }
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    let (mut old_r, mut r) = (BigInt::from_biguint(Sign::Plus, a % modulus), m.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    while !r.is_zero() {
        let q = &old_r / &r;
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
    }
    // old_r = gcd(a, m) and old_s·a ≡ old_r (mod m)
    if !old_r.is_one() {
        return Err(NumberError::NotInvertible {
            value: a.clone(),
            modulus: modulus.clone(),
            gcd: old_r.magnitude().clone(),
        });
    }
    let inv = old_s.mod_floor(&m);
    Ok(inv.magnitude().clone())
}

/// `(a - b) mod modulus`, taking both operands as residues.
pub fn mod_sub(a: &BigNat, b: &BigNat, modulus: &BigNat) -> BigNat {
    let a = a % modulus;
    let b = b % modulus;
    if a >= b {
        a - b
    } else {
        modulus - (b - a)
    }
}

pub fn mod_mul(a: &BigNat, b: &BigNat, modulus: &BigNat) -> BigNat {
    (a * b) % modulus
}

pub fn is_unit(a: &BigNat, modulus: &BigNat) -> bool {
    a.gcd(modulus).is_one()
}

const WITNESSES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Odd primes below 2^14, built once.
fn small_primes() -> &'static [u32] {
    static PRIMES: std::sync::OnceLock<Vec<u32>> = std::sync::OnceLock::new();
    PRIMES.get_or_init(|| {
        const LIMIT: usize = 1 << 14;
        let mut sieve = vec![true; LIMIT];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i < LIMIT {
            if sieve[i] {
                let mut j = i * i;
                while j < LIMIT {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (3..LIMIT as u32).filter(|&n| sieve[n as usize]).collect()
    })
}

/// One strong-probable-prime round for odd `n > 3` with `n - 1 = d·2^s`.
fn strong_probable_prime(n: &BigNat, n_minus_1: &BigNat, d: &BigNat, s: u64, base: &BigNat) -> bool {
    let mut y = base.modpow(d, n);
    if y.is_one() || &y == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        y = (&y * &y) % n;
        if &y == n_minus_1 {
            return true;
        }
        if y.is_one() {
            return false;
        }
    }
    false
}

/// Miller–Rabin primality test.
///
/// The first twelve prime bases make the answer exact for every `n < 2^64`.
/// Above that, `rounds` extra bases are drawn from a stream keyed by `n`
/// itself, so the function stays deterministic without an RNG argument.
pub fn is_probable_prime(n: &BigNat, rounds: usize) -> bool {
    if n < &BigNat::from(2u8) {
        return false;
    }
    if let Some(small) = n.to_u64() {
        if small < 4 {
            return true;
        }
        if small % 2 == 0 {
            return false;
        }
    } else if n.is_even() {
        return false;
    }
    for &p in small_primes() {
        let p_big = BigNat::from(p);
        if n == &p_big {
            return true;
        }
        if (n % p).is_zero() {
            return false;
        }
    }

    let n_minus_1 = n - 1u8;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    for w in WITNESSES {
        if !strong_probable_prime(n, &n_minus_1, &d, s, &BigNat::from(w)) {
            return false;
        }
    }
    if n.bits() <= 64 {
        return true;
    }

    let mut rng = ChaCha20Rng::from_seed(Sha256::digest(n.to_bytes_be()).into());
    let span = n - 3u8;
    for _ in 0..rounds.max(1) {
        let base = rand_below(&span, &mut rng) + 2u8;
        if !strong_probable_prime(n, &n_minus_1, &d, s, &base) {
            return false;
        }
    }
    true
}

/// Both square roots of `c` modulo the odd prime `p`, smaller one first.
pub fn sqrt_mod_prime(c: &BigNat, p: &BigNat) -> Result<(BigNat, BigNat), NumberError> {
    if p < &BigNat::from(3u8) || p.is_even() {
        return Err(NumberError::InvalidPrime(p.clone()));
    }
    let c = c % p;
    let one = BigNat::one();
    let p_minus_1 = p - 1u8;
    // Euler's criterion
    if c.modpow(&(&p_minus_1 >> 1), p) != one {
        return Err(NumberError::NotAResidue(c));
    }

    let root = if (p % 4u8) == BigNat::from(3u8) {
        c.modpow(&((p + 1u8) >> 2), p)
    } else {
        tonelli_shanks(&c, p, &p_minus_1)?
    };
    if (&root * &root) % p != c {
        // only reachable when p is not actually prime
        return Err(NumberError::InvalidPrime(p.clone()));
    }
    let other = p - &root;
    Ok(if root <= other { (root, other) } else { (other, root) })
}

fn tonelli_shanks(c: &BigNat, p: &BigNat, p_minus_1: &BigNat) -> Result<BigNat, NumberError> {
    let s = p_minus_1.trailing_zeros().unwrap_or(0);
    let q = p_minus_1 >> s;
    let half = p_minus_1 >> 1;

    let mut z = BigNat::from(2u8);
    while &z < p && &z.modpow(&half, p) != p_minus_1 {
        z += 1u8;
    }
    if &z >= p {
        return Err(NumberError::InvalidPrime(p.clone()));
    }

    let mut m = s;
    let mut cc = z.modpow(&q, p);
    let mut t = c.modpow(&q, p);
    let mut r = c.modpow(&((&q + 1u8) >> 1), p);
    while !t.is_one() {
        let mut i = 0u64;
        let mut t2 = t.clone();
        while !t2.is_one() {
            t2 = (&t2 * &t2) % p;
            i += 1;
            if i == m {
                return Err(NumberError::InvalidPrime(p.clone()));
            }
        }
        let b = cc.modpow(&(BigNat::one() << (m - i - 1)), p);
        m = i;
        cc = (&b * &b) % p;
        t = (&t * &cc) % p;
        r = (&r * &b) % p;
    }
    Ok(r)
}

/// True iff `x` has order `p - 1` modulo `p`.
///
/// `factors` must list every distinct prime factor of `p - 1`; a short list
/// makes the answer meaningless and cannot be detected here.
pub fn is_primitive_root(x: &BigNat, p: &BigNat, factors: &[BigNat]) -> bool {
    if p < &BigNat::from(2u8) {
        return false;
    }
    let x = x % p;
    if x.is_zero() {
        return false;
    }
    let order = p - 1u8;
    factors
        .iter()
        .all(|q| q.is_zero() || !x.modpow(&(&order / q), p).is_one())
}

/// Uniform sample from `[0, upper)` by rejection over `bits(upper - 1)`-bit blocks.
///
/// # Panics
/// If `upper` is zero.
pub fn rand_below<R: RngCore + ?Sized>(upper: &BigNat, rng: &mut R) -> BigNat {
    assert!(!upper.is_zero(), "rand_below: empty range");
    let bits = (upper - 1u8).bits();
    if bits == 0 {
        return BigNat::zero();
    }
    let nbytes = bits.div_ceil(8) as usize;
    let excess = (nbytes as u64 * 8 - bits) as u32;
    let mut buf = vec![0u8; nbytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[0] &= 0xff >> excess;
        let candidate = BigNat::from_bytes_be(&buf);
        if &candidate < upper {
            return candidate;
        }
    }
}

/// Uniform exponent from `[2, p - 2]` coprime to `p - 1`, so it is invertible in the exponent ring.
///
/// # Panics
/// If `p < 5`.
pub fn rand_unit_exponent<R: RngCore + ?Sized>(p: &BigNat, rng: &mut R) -> BigNat {
    assert!(p >= &BigNat::from(5u8), "rand_unit_exponent: p must be at least 5");
    let order = p - 1u8;
    let span = p - 3u8;
    loop {
        let n = rand_below(&span, rng) + 2u8;
        if is_unit(&n, &order) {
            return n;
        }
    }
}

/// Random safe prime `p = 2q + 1` with exactly `bits` bits.
///
/// Candidates for `q` are walked upward from a random start; a shared sieve
/// drops any `q` where `q` or `2q + 1` has a small factor, then base-2
/// Fermat screens run before the full Miller–Rabin tests.
pub fn random_safe_prime<R: RngCore + ?Sized>(bits: u64, rng: &mut R) -> (BigNat, BigNat) {
    assert!(bits >= 4, "random_safe_prime: need at least 4 bits");
    const WINDOW: usize = 1 << 15;
    let q_bits = bits - 1;
    let q_floor = BigNat::one() << (q_bits - 1);
    let q_ceil = BigNat::one() << q_bits;
    let two = BigNat::from(2u8);
    let sieve_primes: Vec<u32> = small_primes()
        .iter()
        .copied()
        .filter(|&r| BigNat::from(r) < q_floor)
        .collect();

    loop {
        let mut start = &q_floor + rand_below(&q_floor, rng);
        start |= BigNat::one();

        // slot k stands for q = start + 2k
        let mut composite = vec![false; WINDOW];
        for &r in &sieve_primes {
            let r = r as usize;
            let res = (&start % r).to_usize().unwrap_or(0);
            let inv2 = r.div_ceil(2);
            // q ≡ 0 and 2q + 1 ≡ 0, i.e. q ≡ (r - 1) / 2 (mod r)
            for target in [0, (r - 1) / 2] {
                let mut k = ((target + r - res) % r) * inv2 % r;
                while k < WINDOW {
                    composite[k] = true;
                    k += r;
                }
            }
        }

        for (k, _) in composite.iter().enumerate().filter(|(_, &c)| !c) {
            let q = &start + 2 * k;
            if q >= q_ceil {
                break;
            }
            let p = (&q << 1) + 1u8;
            if two.modpow(&(&q - 1u8), &q).is_one()
                && two.modpow(&(&p - 1u8), &p).is_one()
                && is_probable_prime(&q, DEFAULT_MR_ROUNDS)
                && is_probable_prime(&p, DEFAULT_MR_ROUNDS)
            {
                return (p, q);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(v: u64) -> BigNat {
        BigNat::from(v)
    }

    fn naive_pow(a: u64, e: u64, m: u64) -> u64 {
        let mut acc = 1 % m;
        for _ in 0..e {
            acc = acc * a % m;
        }
        acc
    }

    fn trial_division_prime(v: u64) -> bool {
        v >= 2 && (2..).take_while(|d| d * d <= v).all(|d| !v.is_multiple_of(d))
    }

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn mod_exp_worked_values() {
        assert_eq!(mod_exp(&n(5), &n(8), &n(23)).unwrap(), n(16));
        assert_eq!(mod_exp(&n(5), &n(15), &n(23)).unwrap(), n(19));
        assert_eq!(mod_exp(&n(19), &n(17), &n(23)).unwrap(), n(21));
        assert_eq!(mod_exp(&n(7), &n(0), &n(23)).unwrap(), n(1));
    }

    #[test]
    fn mod_exp_rejects_small_modulus() {
        assert_eq!(mod_exp(&n(3), &n(3), &n(1)), Err(NumberError::InvalidModulus));
        assert_eq!(mod_exp(&n(3), &n(3), &n(0)), Err(NumberError::InvalidModulus));
    }

    #[test]
    fn mod_exp_matches_repeated_multiplication() {
        for m in [23u64, 101, 65537] {
            for a in 0..200 {
                for e in (0..200).step_by(7) {
                    assert_eq!(mod_exp(&n(a), &n(e), &n(m)).unwrap(), n(naive_pow(a, e, m)));
                }
            }
        }
    }

    #[test]
    fn mod_inv_values() {
        assert_eq!(mod_inv(&n(125), &n(23)).unwrap(), n(7));
        assert_eq!(mod_inv(&n(12), &n(23)).unwrap(), n(2));
        assert_eq!(mod_inv(&n(1), &n(2)).unwrap(), n(1));
        assert_eq!(mod_inv(&n(1), &n(97)).unwrap(), n(1));
        assert_eq!(mod_inv(&n(5), &n(22)).unwrap(), n(9));
    }

    #[test]
    fn mod_inv_reports_gcd() {
        match mod_inv(&n(4), &n(22)) {
            Err(NumberError::NotInvertible { gcd, .. }) => assert_eq!(gcd, n(2)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(mod_inv(&n(0), &n(7)), Err(NumberError::NotInvertible { .. })));
    }

    #[test]
    fn primality_small_cases() {
        assert!(is_probable_prime(&n(23), 1));
        assert!(!is_probable_prime(&n(1), 1));
        assert!(!is_probable_prime(&n(0), 1));
        assert!(is_probable_prime(&n(2), 1));
        assert!(!is_probable_prime(&n(561), 1));
        assert!(!trial_division_prime(561));
    }

    #[test]
    fn primality_agrees_with_trial_division() {
        for v in 0..20_000u64 {
            assert_eq!(is_probable_prime(&n(v), 1), trial_division_prime(v), "{v}");
        }
        // Carmichael numbers and strong pseudoprimes to small bases
        for v in [1105u64, 1729, 2465, 2821, 6601, 8911, 3215031751, 2152302898747, 3474749660383] {
            assert!(!is_probable_prime(&n(v), 1), "{v}");
        }
        assert!(is_probable_prime(&n(18446744073709551557), 1));
    }

    #[test]
    fn primality_large() {
        let m127 = (BigNat::one() << 127) - 1u8;
        assert!(is_probable_prime(&m127, 20));
        let composite = &m127 * &((BigNat::one() << 61) - 1u8);
        assert!(!is_probable_prime(&composite, 20));
    }

    #[test]
    fn sqrt_worked_values() {
        assert_eq!(sqrt_mod_prime(&n(9), &n(23)).unwrap(), (n(3), n(20)));
        assert_eq!(sqrt_mod_prime(&n(1), &n(23)).unwrap(), (n(1), n(22)));
        assert_eq!(sqrt_mod_prime(&n(1), &n(101)).unwrap(), (n(1), n(100)));
        assert_eq!(sqrt_mod_prime(&n(5), &n(23)), Err(NumberError::NotAResidue(n(5))));
        assert_eq!(sqrt_mod_prime(&n(4), &n(2)), Err(NumberError::InvalidPrime(n(2))));
        assert_eq!(sqrt_mod_prime(&n(4), &n(22)), Err(NumberError::InvalidPrime(n(22))));
    }

    #[test]
    fn five_is_not_a_square_mod_23() {
        // brute-force oracle: the set of squares
        let squares: Vec<u64> = (1..23).map(|g| g * g % 23).collect();
        assert!(!squares.contains(&5));
        assert_ne!(mod_exp(&n(5), &n(11), &n(23)).unwrap(), n(1));
    }

    #[test]
    fn sqrt_all_residues_below_500() {
        for p in (3..500u64).filter(|&v| trial_division_prime(v)) {
            let residues: std::collections::BTreeSet<u64> = (1..p).map(|g| g * g % p).collect();
            for c in 1..p {
                let res = sqrt_mod_prime(&n(c), &n(p));
                if residues.contains(&c) {
                    let (r1, r2) = res.unwrap();
                    assert_eq!((&r1 * &r1) % p, n(c));
                    assert_eq!((&r2 * &r2) % p, n(c));
                    assert_eq!(&r1 + &r2, n(p));
                    assert!(r1 < r2);
                } else {
                    assert!(matches!(res, Err(NumberError::NotAResidue(_))), "p={p} c={c}");
                }
            }
        }
    }

    #[test]
    fn primitive_root_values() {
        assert!(is_primitive_root(&n(5), &n(23), &[n(2), n(11)]));
        assert!(!is_primitive_root(&n(1), &n(23), &[n(2), n(11)]));
        assert!(!is_primitive_root(&n(2), &n(23), &[n(2), n(11)]));
        // order of 2 mod 23 by direct computation
        let order = (1..=22).find(|&k| naive_pow(2, k, 23) == 1).unwrap();
        assert_eq!(order, 11);
    }

    #[test]
    fn rand_below_edges() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(rand_below(&n(1), &mut rng), n(0));
        }
        let bound = BigNat::one() << 256;
        for _ in 0..1000 {
            assert!(rand_below(&bound, &mut rng) < bound);
        }
    }

    #[test]
    fn rand_below_is_uniform() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let mut counts = [0u32; 10];
        for _ in 0..100_000 {
            counts[rand_below(&n(10), &mut rng).to_usize().unwrap()] += 1;
        }
        // binomial sigma = sqrt(10^5 · 0.1 · 0.9) ≈ 94.9
        let sigma = (100_000.0f64 * 0.1 * 0.9).sqrt();
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 5.0 * sigma, "{counts:?}");
        }
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - 10_000.0).powi(2) / 10_000.0)
            .sum();
        // 9 degrees of freedom; 0.999 quantile ≈ 27.88
        assert!(chi2 < 27.88, "chi2 = {chi2}");
    }

    #[test]
    fn unit_exponent_support_for_23() {
        let expected: Vec<u64> = (2..=21).filter(|&v| gcd(v, 22) == 1).collect();
        assert_eq!(expected, vec![3, 5, 7, 9, 13, 15, 17, 19, 21]);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..5_000 {
            let e = rand_unit_exponent(&n(23), &mut rng);
            assert!(mod_inv(&e, &n(22)).is_ok());
            seen.insert(e.to_u64().unwrap());
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), expected);
    }

    #[test]
    fn safe_prime_small_sizes() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for bits in [8u64, 16, 32, 64, 128] {
            let (p, q) = random_safe_prime(bits, &mut rng);
            assert_eq!(p.bits(), bits);
            assert_eq!(&p, &((&q << 1) + 1u8));
            assert!(is_probable_prime(&p, 10) && is_probable_prime(&q, 10));
        }
    }

    #[test]
    fn exponent_reduction_mod_order() {
        let p = n(101);
        for x in 1..101u64 {
            for e in [0u64, 1, 99, 100, 101, 250, 1000] {
                assert_eq!(
                    mod_exp(&n(x), &n(e), &p).unwrap(),
                    mod_exp(&n(x), &n(e % 100), &p).unwrap()
                );
            }
        }
    }

    proptest! {
        #[test]
        fn fermat_little_theorem(a in 1u64..10_000, idx in 0usize..50) {
            let primes: Vec<u64> = (3..300u64).filter(|&v| trial_division_prime(v)).collect();
            let p = primes[idx % primes.len()];
            prop_assume!(a % p != 0);
            prop_assert_eq!(mod_exp(&n(a), &n(p - 1), &n(p)).unwrap(), n(1));
        }

        #[test]
        fn inverse_multiplies_to_one(a in 0u64..1_000_000, m in 2u64..1_000_000) {
            if let Ok(inv) = mod_inv(&n(a), &n(m)) {
                prop_assert_eq!((inv * a) % m, n(1 % m));
            } else {
                prop_assert_ne!(gcd(a % m, m), 1);
            }
        }

        #[test]
        fn mod_sub_matches_signed(a in 0u64..10_000, b in 0u64..10_000, m in 1u64..500) {
            let expected = ((a as i64 - b as i64).rem_euclid(m as i64)) as u64;
            prop_assert_eq!(mod_sub(&n(a), &n(b), &n(m)), n(expected));
        }
    }
}
