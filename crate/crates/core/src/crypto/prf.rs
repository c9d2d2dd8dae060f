//! Keyed tags: HMAC-SHA-256 over `domain || input`, truncated to 128 bits.

use hmac::{Hmac, Mac};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::Sha256;

pub const TAG_LEN: usize = 16;

/// Domain for the per-hop tag chain step `F(tau, r)`.
pub const DOMAIN_CHAIN: u8 = 3;
/// Domain for position addresses `P_k(tau)`.
pub const DOMAIN_POSITION: u8 = 4;

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagKey([u8; 32]);

impl std::fmt::Debug for TagKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("TagKey(..)")
    }
}

impl TagKey {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut k = [0u8; 32];
        rng.fill_bytes(&mut k);
        Self(k)
    }

    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tag(pub [u8; TAG_LEN]);

impl Tag {
    pub fn as_bytes(&self) -> &[u8; TAG_LEN] {
        &self.0
    }
}

/// `F(key, (domain, input))`. Any byte string is a valid key, which lets a
/// tag key the next link of its own chain.
pub fn prf_eval(key: &[u8], domain: u8, input: &[u8]) -> Tag {
    let mut mac = Hmac::<Sha256>::new_from_slice(key).expect("HMAC accepts any key length");
    mac.update(&[domain]);
    mac.update(input);
    let out = mac.finalize().into_bytes();
    let mut tag = [0u8; TAG_LEN];
    tag.copy_from_slice(&out[..TAG_LEN]);
    Tag(tag)
}

/// One chain link `F(tau, r)`.
pub fn chain_step(tau: &Tag, r: &[u8]) -> Tag {
    prf_eval(&tau.0, DOMAIN_CHAIN, r)
}

/// Applies `tau <- F(F(tau, first), second)` `rounds` times.
pub fn tag_chain(tau0: &Tag, first: &[u8], second: &[u8], rounds: u64) -> Tag {
    let mut tau = *tau0;
    for _ in 0..rounds {
        tau = chain_step(&chain_step(&tau, first), second);
    }
    tau
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use std::collections::HashSet;

    #[test]
    fn deterministic_and_fixed_length() {
        let k = TagKey::from_bytes([7; 32]);
        let a = prf_eval(k.as_bytes(), 1, b"w4");
        assert_eq!(a, prf_eval(k.as_bytes(), 1, b"w4"));
        assert_eq!(a.as_bytes().len(), TAG_LEN);
        assert_ne!(a, prf_eval(k.as_bytes(), 1, b"w5"));
    }

    #[test]
    fn domains_separate() {
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let k = TagKey::generate(&mut rng);
        let mut seen = HashSet::new();
        for _ in 0..10_000 {
            let x: [u8; 12] = rng.gen();
            let t1 = prf_eval(k.as_bytes(), 1, &x);
            let t2 = prf_eval(k.as_bytes(), 2, &x);
            assert_ne!(t1, t2);
            assert!(seen.insert(t1));
            assert!(seen.insert(t2));
        }
    }

    #[test]
    fn chain_is_reproducible_and_ordered() {
        let tau0 = prf_eval(&[1; 32], 1, b"0101**");
        let (r1, r2) = (b"r1-bytes".as_slice(), b"r2-bytes".as_slice());
        let a = tag_chain(&tau0, r2, r1, 5);
        assert_eq!(a, tag_chain(&tau0, r2, r1, 5));
        assert_eq!(tag_chain(&tau0, r2, r1, 0), tau0);
        // composes link by link
        let mut manual = tau0;
        for _ in 0..5 {
            manual = chain_step(&chain_step(&manual, r2), r1);
        }
        assert_eq!(a, manual);
        // hop order matters
        assert_ne!(a, tag_chain(&tau0, r1, r2, 5));
        // all positions distinct
        let all: HashSet<_> = (0..50).map(|u| tag_chain(&tau0, r2, r1, u)).collect();
        assert_eq!(all.len(), 50);
    }
}
