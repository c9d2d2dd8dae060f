//! Re-randomizable encryption of ID fields with decryption split across two
//! servers.
//!
//! The combined exponent `d` (`d = 0 mod lambda`, `d = 1 mod n`) is shared
//! additively modulo `n * lambda`, the exponent of `Z_{n^2}^*`, so
//! `C^d1 * C^d2 = C^d = 1 + m n mod n^2`.

use num_bigint::{BigUint, RandBigInt};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::crypto::paillier::{
    l_function, paillier_add, PaillierCiphertext, PaillierKeyPair, PaillierPublicKey,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ShareIndex {
    One,
    Two,
}

impl ShareIndex {
    pub fn other(self) -> Self {
        match self {
            Self::One => Self::Two,
            Self::Two => Self::One,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Self::One => 1,
            Self::Two => 2,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            1 => Some(Self::One),
            2 => Some(Self::Two),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialDecKey {
    index: ShareIndex,
    exponent: BigUint,
}

impl PartialDecKey {
    pub fn index(&self) -> ShareIndex {
        self.index
    }

    pub fn exponent(&self) -> &BigUint {
        &self.exponent
    }

    pub fn from_parts(index: ShareIndex, exponent: BigUint) -> Self {
        Self { index, exponent }
    }
}

/// The original ciphertext travels with its partial exponentiation so the
/// completing party needs nothing else.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialDecryption {
    pub ciphertext: PaillierCiphertext,
    pub partial: BigUint,
    pub index: ShareIndex,
}

pub fn tur_setup<R: RngCore + CryptoRng>(bits: u64, rng: &mut R) -> Result<PaillierKeyPair> {
    PaillierKeyPair::generate(bits, rng)
}

pub fn tur_keygen<R: RngCore + CryptoRng>(
    kp: &PaillierKeyPair,
    rng: &mut R,
) -> (PartialDecKey, PartialDecKey) {
    let modulus = kp.public.n() * kp.secret.lambda();
    let d1 = rng.gen_biguint_below(&modulus);
    let d2 = (kp.secret.combined_exponent() + &modulus - &d1) % &modulus;
    (
        PartialDecKey {
            index: ShareIndex::One,
            exponent: d1,
        },
        PartialDecKey {
            index: ShareIndex::Two,
            exponent: d2,
        },
    )
}

pub fn tur_enc<R: RngCore + CryptoRng>(
    m: &BigUint,
    pk: &PaillierPublicKey,
    rng: &mut R,
) -> Result<PaillierCiphertext> {
    if m >= pk.n() {
        return Err(Error::PlaintextOutOfRange);
    }
    let gm = (BigUint::from(1u32) + m * pk.n()) % pk.n_squared();
    Ok(PaillierCiphertext(
        (gm * pk.zero_encryption(rng)) % pk.n_squared(),
    ))
}

/// `C * Enc(0)`.
pub fn tur_reenc<R: RngCore + CryptoRng>(
    c: &PaillierCiphertext,
    pk: &PaillierPublicKey,
    rng: &mut R,
) -> Result<PaillierCiphertext> {
    if c.0 == BigUint::ZERO || &c.0 >= pk.n_squared() {
        return Err(Error::InvalidCiphertext);
    }
    Ok(PaillierCiphertext(
        (&c.0 * pk.zero_encryption(rng)) % pk.n_squared(),
    ))
}

pub fn tur_pdec(
    c: &PaillierCiphertext,
    key: &PartialDecKey,
    pk: &PaillierPublicKey,
) -> Result<PartialDecryption> {
    if c.0 == BigUint::ZERO || &c.0 >= pk.n_squared() {
        return Err(Error::InvalidCiphertext);
    }
    Ok(PartialDecryption {
        ciphertext: c.clone(),
        partial: c.0.modpow(&key.exponent, pk.n_squared()),
        index: key.index,
    })
}

pub fn tur_dec(
    pd: &PartialDecryption,
    key: &PartialDecKey,
    pk: &PaillierPublicKey,
) -> Result<BigUint> {
    if pd.index == key.index {
        return Err(Error::MatchingShareIndex);
    }
    complete(pd, key, pk)
}

fn complete(pd: &PartialDecryption, key: &PartialDecKey, pk: &PaillierPublicKey) -> Result<BigUint> {
    let own = pd.ciphertext.0.modpow(&key.exponent, pk.n_squared());
    let x = (own * &pd.partial) % pk.n_squared();
    l_function(&x, pk.n()).ok_or(Error::InvalidPartial)
}

pub fn tur_add(
    pk: &PaillierPublicKey,
    a: &PaillierCiphertext,
    b: &PaillierCiphertext,
) -> PaillierCiphertext {
    paillier_add(pk, a, b)
}
