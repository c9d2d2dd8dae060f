//! Ground-truth views of a deployment, for tests and evaluation. These use
//! the owner's secrets and are never available to any protocol party.

use std::collections::{BTreeMap, HashSet};

use brasp_core::crypto::{tpf_rnd, ShareIndex};
use brasp_core::index::{Bitmap, PackingParams, Term};
use brasp_core::protocol::index_fingerprints;

use crate::deployment::Deployment;
use crate::error::{SimError, SimResult};

/// The combined plaintext bitmap of every term, recovered by locating each
/// term's entry on both servers through the label law and decrypting.
pub fn logical_bitmaps(d: &Deployment) -> SimResult<BTreeMap<Term, Bitmap>> {
    let group = &d.config().group;
    let missing = || SimError::Order("deployment has no keys or index".into());
    let owner = d.owner().keys().ok_or_else(missing)?;
    let client = d.client().keys().ok_or_else(missing)?;
    let states = d.client().states().ok_or_else(missing)?;
    let params = PackingParams::for_key(&owner.paillier.public, d.config().slot_bits)?;
    let sides = [ShareIndex::One, ShareIndex::Two]
        .map(|s| d.server(s).indexes().ok_or_else(missing))
        .into_iter()
        .collect::<SimResult<Vec<_>>>()?;
    let mut out = BTreeMap::new();
    for (term, &counter) in &states.counters {
        let key = owner.k_m.advanced(group, &client.r1, &client.r2, counter);
        let label = tpf_rnd(group, &key, &term.canonical_bytes());
        let n = sides[0].prefix.n;
        let mut full = Bitmap::zeros(n);
        for s in &sides {
            let entry = s
                .get(term.kind())
                .entries
                .iter()
                .find(|e| e.label == label)
                .ok_or_else(|| SimError::Order(format!("no entry for {term} on {:?}", s.side)))?;
            full = full.xor(&entry.id.decrypt(&owner.paillier, n, &params)?)?;
        }
        out.insert(term.clone(), full);
    }
    Ok(out)
}

/// Every label, tag and ID ciphertext stored on either server.
pub fn stored_fingerprints(d: &Deployment) -> HashSet<Vec<u8>> {
    let mut out = HashSet::new();
    for side in [ShareIndex::One, ShareIndex::Two] {
        let s = d.server(side);
        if let (Some(idx), Some(k)) = (s.indexes(), s.keys()) {
            out.extend(index_fingerprints(&idx.prefix, &k.pk));
            out.extend(index_fingerprints(&idx.keyword, &k.pk));
        }
    }
    out
}
