//! Joint re-encryption and permutation of index entries.
//!
//! Each server's shares make a round trip through the peer: the peer applies
//! its hop, the holder applies its own. One hop raises every label to the
//! hop's scalar, re-randomizes every ID chunk, extends the tag chain by one
//! link and permutes the entries.

use rand::seq::SliceRandom;
use rand::{CryptoRng, RngCore};

use crate::crypto::group::GroupParams;
use crate::crypto::prf::chain_step;
use crate::crypto::{tpf_reenc, PaillierPublicKey, ReEncKey};
use crate::error::Result;
use crate::index::{EncryptedIndex, EncryptedIndexEntry, ServerIndexes};
use crate::protocol::setup::ServerKeys;

pub fn shuffle_hop<R: RngCore + CryptoRng>(
    entries: &mut Vec<EncryptedIndexEntry>,
    r: &ReEncKey,
    chain_input: &[u8],
    group: &GroupParams,
    pk: &PaillierPublicKey,
    rng: &mut R,
) -> Result<()> {
    for e in entries.iter_mut() {
        e.label = tpf_reenc(group, &e.label, r)?;
        e.id = e.id.rerandomize(pk, rng)?;
        e.tag = chain_step(&e.tag, chain_input);
    }
    entries.shuffle(rng);
    Ok(())
}

/// One server's hop over both indexes of a share set.
pub fn server_hop<R: RngCore + CryptoRng>(
    idx: &mut ServerIndexes,
    keys: &ServerKeys,
    group: &GroupParams,
    rng: &mut R,
) -> Result<()> {
    let input = keys.chain_input(group);
    for index in [&mut idx.prefix, &mut idx.keyword] {
        shuffle_hop(&mut index.entries, &keys.r, &input, group, &keys.pk, rng)?;
    }
    Ok(())
}

/// A full round over both servers' shares, run in one place. `keys[0]`
/// belongs to the holder of `shares[0]`.
pub fn index_shuffle_round<R: RngCore + CryptoRng>(
    shares: &mut [ServerIndexes; 2],
    keys: &[ServerKeys; 2],
    group: &GroupParams,
    rng: &mut R,
) -> Result<()> {
    server_hop(&mut shares[0], &keys[1], group, rng)?;
    server_hop(&mut shares[0], &keys[0], group, rng)?;
    server_hop(&mut shares[1], &keys[0], group, rng)?;
    server_hop(&mut shares[1], &keys[1], group, rng)?;
    Ok(())
}

/// All labels, ID chunks and tags of an index, for linkage scans.
pub fn index_fingerprints(index: &EncryptedIndex, pk: &PaillierPublicKey) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for e in &index.entries {
        out.push(e.label.as_bytes().to_vec());
        out.push(e.tag.as_bytes().to_vec());
        for c in &e.id.chunks {
            out.push(pk.ciphertext_to_bytes(c));
        }
    }
    out
}
