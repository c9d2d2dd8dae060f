//! Probabilistic primality testing and random prime generation.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};

const SMALL_PRIMES: [u32; 54] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
    193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

/// Upper bound on candidates drawn by [`random_prime`] before giving up.
pub const MAX_PRIME_CANDIDATES: usize = 200_000;

/// Miller-Rabin with `rounds` deterministic-by-index bases plus trial division.
pub fn is_probable_prime(n: &BigUint, rounds: usize) -> bool {
    if *n < BigUint::from(2u32) {
        return false;
    }
    for &p in SMALL_PRIMES.iter() {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    // Bases are the first `rounds` small primes and then pseudo-random values
    // derived from n itself, so the test is reproducible.
    let mut bases: Vec<BigUint> = SMALL_PRIMES
        .iter()
        .take(rounds)
        .map(|&b| BigUint::from(b))
        .collect();
    let mut x = n.clone();
    while bases.len() < rounds {
        x = (&x * &x + 12345u32) % n;
        bases.push(&x % (n - 3u32) + 2u32);
    }
    'witness: for a in bases {
        let a = a % n;
        if a.is_zero() || a == one || a == n_minus_1 {
            continue;
        }
        let mut y = a.modpow(&d, n);
        if y == one || y == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            y = (&y * &y) % n;
            if y == n_minus_1 {
                continue 'witness;
            }
            if y == one {
                return false;
            }
        }
        return false;
    }
    true
}

/// A uniformly drawn prime of exactly `bits` bits with the top two bits set,
/// so a product of two such primes has exactly `2 * bits` bits.
pub fn random_prime<R: RngCore + CryptoRng>(bits: u64, rng: &mut R) -> Result<BigUint> {
    assert!(bits >= 4, "prime too small");
    for _ in 0..MAX_PRIME_CANDIDATES {
        let mut c = rng.gen_biguint(bits);
        c.set_bit(bits - 1, true);
        c.set_bit(bits - 2, true);
        c.set_bit(0, true);
        if is_probable_prime(&c, 32) {
            return Ok(c);
        }
    }
    Err(Error::PrimeGeneration(MAX_PRIME_CANDIDATES))
}

/// Modular inverse for coprime inputs.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    use num_bigint::BigInt;
    let a = BigInt::from(a.clone());
    let m_i = BigInt::from(m.clone());
    let e = a.extended_gcd(&m_i);
    if !e.gcd.is_one() {
        return None;
    }
    let x = e.x.mod_floor(&m_i);
    x.to_biguint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn trial(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn agrees_with_trial_division_below_20000() {
        for n in 0u64..20_000 {
            assert_eq!(is_probable_prime(&BigUint::from(n), 16), trial(n), "n = {n}");
        }
    }

    #[test]
    fn rejects_carmichael_numbers() {
        for n in [561u64, 1105, 1729, 2465, 2821, 6601, 8911, 41041, 825265] {
            assert!(!is_probable_prime(&BigUint::from(n), 16));
        }
    }

    #[test]
    fn random_primes_have_exact_length() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for bits in [16u64, 64, 128] {
            let p = random_prime(bits, &mut rng).unwrap();
            assert_eq!(p.bits(), bits);
            assert!(is_probable_prime(&p, 32));
        }
    }

    #[test]
    fn inverse() {
        let m = BigUint::from(11u32);
        for a in 1u32..11 {
            let inv = mod_inverse(&BigUint::from(a), &m).unwrap();
            assert_eq!((inv * a) % &m, BigUint::one());
        }
        assert!(mod_inverse(&BigUint::from(4u32), &BigUint::from(8u32)).is_none());
    }
}
