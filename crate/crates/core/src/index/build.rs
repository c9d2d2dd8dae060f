use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::crypto::group::GroupParams;
use crate::crypto::{
    prf_eval, tpf_rnd, PaillierPublicKey, ShareIndex, Tag, TagKey, TpfKey, TpfLabel,
};
use crate::error::{Error, Result};
use crate::index::bitmap::{split_shares, Bitmap};
use crate::index::object::{validate_db, IndexKind, SpatioTextualObject, Term};
use crate::index::packing::{pack_bitmap, PackedBitmap, PackingParams};
use crate::spatial::{prefix_family, prefix_universe, PrefixElement};

/// Largest Hilbert bit width whose full prefix universe is materialized.
pub const MAX_INDEXED_BITS: u8 = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlainIndexes {
    pub n: usize,
    pub bits: u8,
    pub prefix: BTreeMap<PrefixElement, Bitmap>,
    pub keyword: BTreeMap<String, Bitmap>,
}

impl PlainIndexes {
    pub fn bitmap(&self, term: &Term) -> Option<&Bitmap> {
        match term {
            Term::Prefix(p) => self.prefix.get(p),
            Term::Keyword(w) => self.keyword.get(w),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Term, &Bitmap)> {
        self.prefix
            .iter()
            .map(|(p, b)| (Term::Prefix(*p), b))
            .chain(self.keyword.iter().map(|(w, b)| (Term::Keyword(w.clone()), b)))
    }
}

/// One prefix bitmap per element of the universe and one keyword bitmap per
/// vocabulary word.
pub fn build_plain_indexes(db: &[SpatioTextualObject], bits: u8) -> Result<PlainIndexes> {
    if bits == 0 || bits > MAX_INDEXED_BITS {
        return Err(Error::UniverseTooLarge(bits));
    }
    validate_db(db, bits)?;
    let n = db.len();
    let mut prefix: BTreeMap<PrefixElement, Bitmap> =
        prefix_universe(bits).map(|p| (p, Bitmap::zeros(n))).collect();
    let mut keyword: BTreeMap<String, Bitmap> = BTreeMap::new();
    for o in db {
        let i = o.id as usize;
        for p in prefix_family(o.loc.0, bits)? {
            if let Some(b) = prefix.get_mut(&p) {
                b.set(i, true);
            }
        }
        for w in &o.keywords {
            keyword
                .entry(w.clone())
                .or_insert_with(|| Bitmap::zeros(n))
                .set(i, true);
        }
    }
    Ok(PlainIndexes {
        n,
        bits,
        prefix,
        keyword,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncryptedIndexEntry {
    pub label: TpfLabel,
    pub id: PackedBitmap,
    pub tag: Tag,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncryptedIndex {
    pub kind: IndexKind,
    pub side: ShareIndex,
    /// Bitmap length, i.e. the database size the ID fields encode.
    pub n: usize,
    pub entries: Vec<EncryptedIndexEntry>,
}

impl EncryptedIndex {
    pub fn label_positions(&self) -> HashMap<&[u8], usize> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.label.as_bytes(), i))
            .collect()
    }

    pub fn check_unique_labels(&self) -> Result<()> {
        if self.label_positions().len() == self.entries.len() {
            Ok(())
        } else {
            Err(Error::DuplicateLabel)
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The prefix and keyword index shares held by one server.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServerIndexes {
    pub side: ShareIndex,
    pub prefix: EncryptedIndex,
    pub keyword: EncryptedIndex,
}

impl ServerIndexes {
    pub fn get(&self, kind: IndexKind) -> &EncryptedIndex {
        match kind {
            IndexKind::Prefix => &self.prefix,
            IndexKind::Keyword => &self.keyword,
        }
    }

    pub fn get_mut(&mut self, kind: IndexKind) -> &mut EncryptedIndex {
        match kind {
            IndexKind::Prefix => &mut self.prefix,
            IndexKind::Keyword => &mut self.keyword,
        }
    }

    pub fn entry_count(&self) -> usize {
        self.prefix.len() + self.keyword.len()
    }
}

/// `F(k_T, (side, term))`.
pub fn initial_tag(k_t: &TagKey, side: ShareIndex, term: &Term) -> Tag {
    prf_eval(k_t.as_bytes(), side.as_u8(), &term.canonical_bytes())
}

/// Labels every term under `k_M`, splits its bitmap into two shares and
/// encrypts each share for its server. Entries are stored in random order.
#[allow(clippy::too_many_arguments)]
pub fn encrypted_index_build<R: RngCore + CryptoRng>(
    plain: &PlainIndexes,
    group: &GroupParams,
    k_m: &TpfKey,
    k_t: &TagKey,
    pk: &PaillierPublicKey,
    params: &PackingParams,
    rng: &mut R,
) -> Result<[ServerIndexes; 2]> {
    let mut out = [ShareIndex::One, ShareIndex::Two].map(|side| ServerIndexes {
        side,
        prefix: EncryptedIndex {
            kind: IndexKind::Prefix,
            side,
            n: plain.n,
            entries: Vec::new(),
        },
        keyword: EncryptedIndex {
            kind: IndexKind::Keyword,
            side,
            n: plain.n,
            entries: Vec::new(),
        },
    });
    for (term, bitmap) in plain.terms() {
        let label = tpf_rnd(group, k_m, &term.canonical_bytes());
        let shares = split_shares(bitmap, rng);
        for (slot, share) in [&shares.one, &shares.two].into_iter().enumerate() {
            let side = out[slot].side;
            let entry = EncryptedIndexEntry {
                label: label.clone(),
                id: pack_bitmap(share, params, pk, rng)?,
                tag: initial_tag(k_t, side, &term),
            };
            out[slot].get_mut(term.kind()).entries.push(entry);
        }
    }
    for s in &mut out {
        s.prefix.entries.shuffle(rng);
        s.keyword.entries.shuffle(rng);
    }
    Ok(out)
}
