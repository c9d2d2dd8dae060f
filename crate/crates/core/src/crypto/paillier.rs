//! Paillier encryption with generator `1 + n`.
//!
//! Fresh randomizers are drawn as `(h^n)^a mod n^2` for a public base `h`
//! derived from `n`. The base is fixed, so exponentiation runs against a
//! precomputed window table instead of a full `r^n` per ciphertext.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::crypto::primes::{is_probable_prime, mod_inverse, random_prime};
use crate::error::{Error, Result};

/// Extra exponent bits drawn beyond `|n|` so the randomizer exponent is
/// statistically close to uniform modulo the order of `h^n`.
const RANDOMIZER_SLACK_BITS: u64 = 128;

/// Table window width: 8 bits up to 1024-bit moduli, 6 above (the 2048-bit
/// table would otherwise pass 30 MB).
fn window_bits(modulus_bits: u64) -> u64 {
    if modulus_bits <= 2048 {
        8
    } else {
        6
    }
}

/// Key sizes accepted by [`PaillierKeyPair::generate`].
pub const SUPPORTED_MODULUS_BITS: [u64; 3] = [512, 1024, 2048];

/// Row `i` holds `base^(j * 2^(w*i))` for every window digit `j`, so a power
/// costs one multiplication per nonzero digit and no squarings.
struct FixedBase {
    window: u64,
    rows: Vec<Vec<BigUint>>,
}

impl FixedBase {
    fn new(base: &BigUint, modulus: &BigUint, exp_bits: u64) -> Self {
        let window = window_bits(modulus.bits());
        let windows = exp_bits.div_ceil(window) as usize;
        let mut rows = Vec::with_capacity(windows);
        let mut b = base.clone();
        for _ in 0..windows {
            let mut row = Vec::with_capacity(1 << window);
            row.push(BigUint::one());
            for j in 1..(1usize << window) {
                let next = (&row[j - 1] * &b) % modulus;
                row.push(next);
            }
            b = (&row[(1 << window) - 1] * &b) % modulus;
            rows.push(row);
        }
        Self { window, rows }
    }

    fn pow(&self, e: &BigUint, modulus: &BigUint) -> BigUint {
        let mut acc = BigUint::one();
        let digits = e.to_radix_le(1 << self.window);
        debug_assert!(digits.len() <= self.rows.len());
        for (row, &d) in self.rows.iter().zip(digits.iter()) {
            if d != 0 {
                acc = (acc * &row[d as usize]) % modulus;
            }
        }
        acc
    }
}

#[derive(Clone, Serialize, Deserialize)]
pub struct PaillierPublicKey {
    n: BigUint,
    n_squared: BigUint,
    #[serde(skip)]
    randomizer: OnceLock<Arc<FixedBase>>,
}

impl fmt::Debug for PaillierPublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PaillierPublicKey")
            .field("bits", &self.n.bits())
            .finish()
    }
}

impl PartialEq for PaillierPublicKey {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Eq for PaillierPublicKey {}

impl PaillierPublicKey {
    pub fn from_modulus(n: BigUint) -> Result<Self> {
        if n < BigUint::from(6u32) || n.is_even() {
            return Err(Error::InvalidCiphertext);
        }
        let n_squared = &n * &n;
        Ok(Self {
            n,
            n_squared,
            randomizer: OnceLock::new(),
        })
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn n_squared(&self) -> &BigUint {
        &self.n_squared
    }

    pub fn modulus_bits(&self) -> u64 {
        self.n.bits()
    }

    /// Serialized ciphertext width: twice the byte length of `n`.
    pub fn ciphertext_len(&self) -> usize {
        2 * self.n.bits().div_ceil(8) as usize
    }

    fn randomizer(&self) -> &FixedBase {
        self.randomizer.get_or_init(|| {
            let h = self.derive_base();
            let hn = h.modpow(&self.n, &self.n_squared);
            Arc::new(FixedBase::new(
                &hn,
                &self.n_squared,
                self.n.bits() + RANDOMIZER_SLACK_BITS,
            ))
        })
    }

    fn derive_base(&self) -> BigUint {
        let want = self.n_squared.bits().div_ceil(8) as usize + 16;
        let n_bytes = self.n.to_bytes_be();
        for counter in 0u32.. {
            let mut stream = Vec::with_capacity(want + 32);
            let mut block = 0u32;
            while stream.len() < want {
                let mut hasher = Sha256::new();
                hasher.update(b"brasp/paillier/randomizer-base");
                hasher.update(&n_bytes);
                hasher.update(counter.to_be_bytes());
                hasher.update(block.to_be_bytes());
                stream.extend_from_slice(&hasher.finalize());
                block += 1;
            }
            let h = BigUint::from_bytes_be(&stream[..want]) % &self.n_squared;
            if h > BigUint::one() && h.gcd(&self.n).is_one() {
                return h;
            }
        }
        unreachable!("counter space exhausted")
    }

    /// A fresh encryption of zero.
    pub fn zero_encryption<R: RngCore + CryptoRng>(&self, rng: &mut R) -> BigUint {
        let a = rng.gen_biguint(self.n.bits() + RANDOMIZER_SLACK_BITS);
        self.randomizer().pow(&a, &self.n_squared)
    }

    /// Textbook encryption `(1 + n)^m * r^n mod n^2` with an explicit nonce.
    pub fn encrypt_with_nonce(&self, m: &BigUint, r: &BigUint) -> Result<PaillierCiphertext> {
        if m >= &self.n {
            return Err(Error::PlaintextOutOfRange);
        }
        if r.is_zero() || !r.gcd(&self.n).is_one() {
            return Err(Error::InvalidCiphertext);
        }
        let gm = (BigUint::one() + m * &self.n) % &self.n_squared;
        Ok(PaillierCiphertext(
            (gm * r.modpow(&self.n, &self.n_squared)) % &self.n_squared,
        ))
    }

    pub fn validate(&self, c: &PaillierCiphertext) -> Result<()> {
        if c.0.is_zero() || c.0 >= self.n_squared || !c.0.gcd(&self.n).is_one() {
            return Err(Error::InvalidCiphertext);
        }
        Ok(())
    }

    pub fn ciphertext_from_bytes(&self, bytes: &[u8]) -> Result<PaillierCiphertext> {
        if bytes.len() != self.ciphertext_len() {
            return Err(Error::InvalidCiphertext);
        }
        let c = PaillierCiphertext(BigUint::from_bytes_be(bytes));
        self.validate(&c)?;
        Ok(c)
    }

    pub fn ciphertext_to_bytes(&self, c: &PaillierCiphertext) -> Vec<u8> {
        let width = self.ciphertext_len();
        let raw = c.0.to_bytes_be();
        let mut out = vec![0u8; width];
        out[width - raw.len()..].copy_from_slice(&raw);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaillierCiphertext(pub(crate) BigUint);

impl PaillierCiphertext {
    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaillierSecretKey {
    p: BigUint,
    q: BigUint,
    lambda: BigUint,
    /// `d = 0 mod lambda`, `d = 1 mod n`.
    d: BigUint,
}

impl PaillierSecretKey {
    pub fn lambda(&self) -> &BigUint {
        &self.lambda
    }

    pub fn combined_exponent(&self) -> &BigUint {
        &self.d
    }

    /// Bytes that must never leave the data owner.
    pub fn secret_fingerprints(&self) -> Vec<Vec<u8>> {
        vec![
            self.p.to_bytes_be(),
            self.q.to_bytes_be(),
            self.lambda.to_bytes_be(),
            self.d.to_bytes_be(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaillierKeyPair {
    pub public: PaillierPublicKey,
    pub secret: PaillierSecretKey,
}

impl PaillierKeyPair {
    pub fn generate<R: RngCore + CryptoRng>(bits: u64, rng: &mut R) -> Result<Self> {
        if !SUPPORTED_MODULUS_BITS.contains(&bits) {
            return Err(Error::UnsupportedSecurity(bits as u32));
        }
        loop {
            let p = random_prime(bits / 2, rng)?;
            let q = random_prime(bits / 2, rng)?;
            if p != q {
                return Self::from_primes(p, q);
            }
        }
    }

    pub fn from_primes(p: BigUint, q: BigUint) -> Result<Self> {
        if p == q || !is_probable_prime(&p, 32) || !is_probable_prime(&q, 32) {
            return Err(Error::InvalidGroup("Paillier factors must be distinct primes"));
        }
        let n = &p * &q;
        let lambda = (&p - 1u32).lcm(&(&q - 1u32));
        let lambda_inv = mod_inverse(&lambda, &n)
            .ok_or(Error::InvalidGroup("gcd(n, lambda) must be 1"))?;
        let d = (&lambda * lambda_inv) % (&n * &lambda);
        Ok(Self {
            public: PaillierPublicKey::from_modulus(n)?,
            secret: PaillierSecretKey { p, q, lambda, d },
        })
    }

    pub fn decrypt(&self, c: &PaillierCiphertext) -> Result<BigUint> {
        let pk = &self.public;
        if c.0.is_zero() || c.0 >= pk.n_squared {
            return Err(Error::InvalidCiphertext);
        }
        let x = c.0.modpow(&self.secret.d, &pk.n_squared);
        l_function(&x, &pk.n).ok_or(Error::InvalidCiphertext)
    }
}

/// `(x - 1) / n` when `x = 1 mod n`.
pub(crate) fn l_function(x: &BigUint, n: &BigUint) -> Option<BigUint> {
    if x.is_zero() {
        return None;
    }
    let (quot, rem) = (x - 1u32).div_rem(n);
    rem.is_zero().then_some(quot)
}

/// Homomorphic addition of plaintexts.
pub fn paillier_add(
    pk: &PaillierPublicKey,
    a: &PaillierCiphertext,
    b: &PaillierCiphertext,
) -> PaillierCiphertext {
    PaillierCiphertext((&a.0 * &b.0) % &pk.n_squared)
}
