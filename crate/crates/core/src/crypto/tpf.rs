//! Label PRF with key-switching: `rnd(k, m) = F_G(m)^k`, and a label under
//! `k1` is moved to `k2` by raising it to `k2 / k1`.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::crypto::group::GroupParams;
use crate::error::{Error, Result};

/// Secret exponent in `[1, q - 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TpfKey(BigUint);

/// Key-switching exponent `k2 / k1 mod q`. Shuffle parameters are also
/// applied to labels through this type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReEncKey(BigUint);

/// A serialized group element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TpfLabel(Vec<u8>);

fn nonzero_scalar<R: RngCore + CryptoRng>(group: &GroupParams, rng: &mut R) -> BigUint {
    rng.gen_biguint_range(&BigUint::one(), group.order())
}

fn check_scalar(group: &GroupParams, v: BigUint) -> Result<BigUint> {
    let v = v % group.order();
    if v.is_zero() {
        Err(Error::ZeroScalar)
    } else {
        Ok(v)
    }
}

/// Fixed-width big-endian encoding of a scalar modulo `q`.
pub fn scalar_bytes(group: &GroupParams, v: &BigUint) -> Vec<u8> {
    let width = group.order().bits().div_ceil(8) as usize;
    let raw = v.to_bytes_be();
    let mut out = vec![0u8; width];
    out[width - raw.len()..].copy_from_slice(&raw);
    out
}

impl TpfKey {
    pub fn from_scalar(group: &GroupParams, v: BigUint) -> Result<Self> {
        check_scalar(group, v).map(Self)
    }

    pub fn scalar(&self) -> &BigUint {
        &self.0
    }

    pub fn to_bytes(&self, group: &GroupParams) -> Vec<u8> {
        scalar_bytes(group, &self.0)
    }

    /// `k * (r1 * r2)^epochs mod q`, the key under which a label sits after
    /// `epochs` full shuffle rounds.
    pub fn advanced(&self, group: &GroupParams, r1: &ReEncKey, r2: &ReEncKey, epochs: u64) -> Self {
        let q = group.order();
        let step = (&r1.0 * &r2.0) % q;
        Self((&self.0 * step.modpow(&BigUint::from(epochs), q)) % q)
    }
}

impl ReEncKey {
    pub fn from_scalar(group: &GroupParams, v: BigUint) -> Result<Self> {
        check_scalar(group, v).map(Self)
    }

    pub fn random<R: RngCore + CryptoRng>(group: &GroupParams, rng: &mut R) -> Self {
        Self(nonzero_scalar(group, rng))
    }

    pub fn scalar(&self) -> &BigUint {
        &self.0
    }

    pub fn to_bytes(&self, group: &GroupParams) -> Vec<u8> {
        scalar_bytes(group, &self.0)
    }

    pub fn inverse(&self, group: &GroupParams) -> Self {
        let q = group.order();
        Self(self.0.modpow(&(q - 2u32), q))
    }
}

impl TpfLabel {
    pub fn from_bytes(group: &GroupParams, bytes: &[u8]) -> Result<Self> {
        group.validate(bytes)?;
        Ok(Self(bytes.to_vec()))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

pub fn tpf_keygen<R: RngCore + CryptoRng>(group: &GroupParams, rng: &mut R) -> TpfKey {
    TpfKey(nonzero_scalar(group, rng))
}

pub fn tpf_rnd(group: &GroupParams, k: &TpfKey, m: &[u8]) -> TpfLabel {
    TpfLabel(group.hash_pow(m, &k.0))
}

/// `k2 * k1^-1 mod q`.
pub fn tpf_reckeygen(group: &GroupParams, k1: &TpfKey, k2: &TpfKey) -> ReEncKey {
    let q = group.order();
    let inv = k1.0.modpow(&(q - 2u32), q);
    ReEncKey((&k2.0 * inv) % q)
}

pub fn tpf_reenc(group: &GroupParams, s: &TpfLabel, rk: &ReEncKey) -> Result<TpfLabel> {
    group.pow(&s.0, &rk.0).map(TpfLabel)
}
