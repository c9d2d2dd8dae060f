//! Prime-order groups hosting the label PRF.
//!
//! Hash-to-group is realized as `g^(H(m) mod q)` with `H` = SHA-256, so an
//! exponentiation of a hashed message by a key collapses into a single
//! generator exponentiation by the product of the two scalars.

use std::sync::OnceLock;

use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::crypto::primes::is_probable_prime;
use crate::error::{Error, Result};

/// Subgroup of order `q` in `Z_p^*`, generated by `g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModPGroup {
    p: BigUint,
    q: BigUint,
    g: BigUint,
}

impl ModPGroup {
    pub fn new(p: BigUint, q: BigUint, g: BigUint) -> Result<Self> {
        if !is_probable_prime(&q, 32) {
            return Err(Error::InvalidGroup("group order is not prime"));
        }
        if p <= BigUint::one() || !((&p - 1u32) % &q).is_zero() {
            return Err(Error::InvalidGroup("order does not divide p - 1"));
        }
        if g <= BigUint::one() || g >= p || !g.modpow(&q, &p).is_one() {
            return Err(Error::InvalidGroup("generator does not have order q"));
        }
        Ok(Self { p, q, g })
    }

    pub fn modulus(&self) -> &BigUint {
        &self.p
    }

    pub fn generator(&self) -> &BigUint {
        &self.g
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupParams {
    /// The ristretto255 group, order `2^252 + 27742317777372353535851937790883648493`.
    Ristretto255,
    ModP(ModPGroup),
}

fn ristretto_order() -> &'static BigUint {
    static ORDER: OnceLock<BigUint> = OnceLock::new();
    ORDER.get_or_init(|| {
        (BigUint::one() << 252u32)
            + "27742317777372353535851937790883648493"
                .parse::<BigUint>()
                .expect("constant")
    })
}

fn to_scalar(v: &BigUint) -> Scalar {
    let mut bytes = [0u8; 32];
    let le = (v % ristretto_order()).to_bytes_le();
    bytes[..le.len()].copy_from_slice(&le);
    Scalar::from_bytes_mod_order(bytes)
}

pub(crate) fn sha256_int(m: &[u8]) -> BigUint {
    BigUint::from_bytes_be(&Sha256::digest(m))
}

impl GroupParams {
    pub fn ristretto255() -> Self {
        Self::Ristretto255
    }

    /// Order-11 subgroup of `Z_23^*` generated by 2, for exhaustive tests.
    pub fn toy() -> Self {
        Self::ModP(
            ModPGroup::new(23u32.into(), 11u32.into(), 2u32.into()).expect("toy group is valid"),
        )
    }

    /// Group for a symmetric security level. Only 128-bit security is offered.
    pub fn for_security(bits: u32) -> Result<Self> {
        match bits {
            128 => Ok(Self::Ristretto255),
            other => Err(Error::UnsupportedSecurity(other)),
        }
    }

    pub fn order(&self) -> &BigUint {
        match self {
            Self::Ristretto255 => ristretto_order(),
            Self::ModP(g) => &g.q,
        }
    }

    /// Serialized width of one element in bytes.
    pub fn element_len(&self) -> usize {
        match self {
            Self::Ristretto255 => 32,
            Self::ModP(g) => g.p.bits().div_ceil(8) as usize,
        }
    }

    pub fn hash_to_exponent(&self, m: &[u8]) -> BigUint {
        sha256_int(m) % self.order()
    }

    /// `g^e` serialized.
    pub fn generator_pow(&self, e: &BigUint) -> Vec<u8> {
        match self {
            Self::Ristretto255 => RistrettoPoint::mul_base(&to_scalar(e))
                .compress()
                .to_bytes()
                .to_vec(),
            Self::ModP(g) => self.encode_int(&g.g.modpow(&(e % &g.q), &g.p)),
        }
    }

    /// `F_G(m)^k = g^(H(m) * k)`.
    pub fn hash_pow(&self, m: &[u8], k: &BigUint) -> Vec<u8> {
        let e = (self.hash_to_exponent(m) * k) % self.order();
        self.generator_pow(&e)
    }

    /// Raise a serialized element to `k`.
    pub fn pow(&self, elem: &[u8], k: &BigUint) -> Result<Vec<u8>> {
        match self {
            Self::Ristretto255 => {
                let point = decode_ristretto(elem)?;
                Ok((point * to_scalar(k)).compress().to_bytes().to_vec())
            }
            Self::ModP(g) => {
                let x = self.decode_int(elem)?;
                Ok(self.encode_int(&x.modpow(&(k % &g.q), &g.p)))
            }
        }
    }

    pub fn validate(&self, elem: &[u8]) -> Result<()> {
        match self {
            Self::Ristretto255 => decode_ristretto(elem).map(|_| ()),
            Self::ModP(_) => self.decode_int(elem).map(|_| ()),
        }
    }

    fn encode_int(&self, x: &BigUint) -> Vec<u8> {
        let width = self.element_len();
        let raw = x.to_bytes_be();
        let mut out = vec![0u8; width];
        out[width - raw.len()..].copy_from_slice(&raw);
        out
    }

    fn decode_int(&self, elem: &[u8]) -> Result<BigUint> {
        let Self::ModP(g) = self else {
            unreachable!("decode_int is only used for modular groups")
        };
        if elem.len() != self.element_len() {
            return Err(Error::InvalidGroupElement);
        }
        let x = BigUint::from_bytes_be(elem);
        if x.is_zero() || x >= g.p || !x.modpow(&g.q, &g.p).is_one() {
            return Err(Error::InvalidGroupElement);
        }
        Ok(x)
    }
}

fn decode_ristretto(elem: &[u8]) -> Result<RistrettoPoint> {
    CompressedRistretto::from_slice(elem)
        .map_err(|_| Error::InvalidGroupElement)?
        .decompress()
        .ok_or(Error::InvalidGroupElement)
}
