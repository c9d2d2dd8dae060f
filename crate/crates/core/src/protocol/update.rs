//! Insertion of one object.
//!
//! The client emits, for every prefix of the new location and every keyword,
//! one token per side carrying an encrypted single-bit delta (zero on the
//! side that does not receive the bit). Existing terms are addressed by the
//! position address of their current tag; fresh keywords carry a label and
//! a base tag. Tokens for a side go to the peer of that side's holder:
//!
//! 1. the holder sends its ID fields keyed by position address, re-randomized;
//! 2. the peer adds each delta at its address and re-randomizes every field;
//! 3. the holder writes the fields back and appends fresh entries.

use std::collections::HashMap;

use rand::{CryptoRng, Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::crypto::group::GroupParams;
use crate::crypto::{
    object_seal, tpf_reenc, tpf_rnd, tur_add, tur_enc, PaillierPublicKey, ShareIndex, Tag,
    TagKey, TpfLabel,
};
use crate::error::{Error, Result};
use crate::index::{
    initial_tag, pack_bitmap, Bitmap, EncryptedIndex, EncryptedIndexEntry, IndexKind,
    PackedBitmap, PackingParams, SpatioTextualObject, Term,
};
use crate::protocol::setup::{ClientKeys, ServerKeys};
use crate::protocol::state::{current_tag, position_address, ShuffleStateTable};
use crate::spatial::prefix_family;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenTarget {
    /// `P_k` of the entry's current tag.
    Address(Tag),
    /// A keyword with no entry yet: label under the client key and base tag.
    Fresh { label: TpfLabel, tag: Tag },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateToken {
    pub target: TokenTarget,
    pub delta: PackedBitmap,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideTokens {
    pub prefix: Vec<UpdateToken>,
    pub keyword: Vec<UpdateToken>,
}

impl SideTokens {
    pub fn get(&self, kind: IndexKind) -> &[UpdateToken] {
        match kind {
            IndexKind::Prefix => &self.prefix,
            IndexKind::Keyword => &self.keyword,
        }
    }

    pub fn len(&self) -> usize {
        self.prefix.len() + self.keyword.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateTokenSet {
    /// Object count after the insertion.
    pub n: usize,
    /// Tokens for the entries held by the first server (sent to the second)
    /// and by the second (sent to the first).
    pub sides: [SideTokens; 2],
}

impl UpdateTokenSet {
    pub fn len(&self) -> usize {
        self.sides[0].len() + self.sides[1].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Builds the four token lists and the sealed object. Fresh keywords are
/// entered into `states` with counter zero.
#[allow(clippy::too_many_arguments)]
pub fn update_token_generation<R: RngCore + CryptoRng>(
    obj: &SpatioTextualObject,
    n_current: usize,
    keys: &ClientKeys,
    states: &mut ShuffleStateTable,
    params: &PackingParams,
    group: &GroupParams,
    bits: u8,
    rng: &mut R,
) -> Result<(UpdateTokenSet, Vec<u8>)> {
    if obj.id as usize != n_current {
        return Err(Error::InvalidObject(format!(
            "new object id {} must equal the current count {n_current}",
            obj.id
        )));
    }
    if obj.keywords.is_empty() {
        return Err(Error::InvalidObject("object has no keywords".into()));
    }
    let n = n_current + 1;
    let bit = Bitmap::from_indices(n, [obj.id as usize]);
    let zero = Bitmap::zeros(n);
    let terms = prefix_family(obj.loc.0, bits)?
        .into_iter()
        .filter(|p| !p.is_all_wildcard())
        .map(Term::Prefix)
        .chain(obj.keywords.iter().map(|w| Term::Keyword(w.clone())));
    let mut sides = [SideTokens::default(), SideTokens::default()];
    for term in terms {
        let to_one: bool = rng.gen();
        let fresh = !states.contains(&term);
        if fresh && term.kind() == IndexKind::Prefix {
            return Err(Error::InvalidObject(format!("prefix {term} missing from state")));
        }
        for (slot, side) in [ShareIndex::One, ShareIndex::Two].into_iter().enumerate() {
            let gets_bit = (slot == 0) == to_one;
            let delta = pack_bitmap(if gets_bit { &bit } else { &zero }, params, &keys.pk, rng)?;
            let target = if fresh {
                TokenTarget::Fresh {
                    label: tpf_rnd(group, &keys.k_u, &term.canonical_bytes()),
                    tag: initial_tag(&keys.k_t, side, &term),
                }
            } else {
                let tau = current_tag(group, keys, side, &term, states.counter(&term));
                TokenTarget::Address(position_address(&keys.k_p, &tau))
            };
            let list = match term.kind() {
                IndexKind::Prefix => &mut sides[slot].prefix,
                IndexKind::Keyword => &mut sides[slot].keyword,
            };
            list.push(UpdateToken { target, delta });
        }
        if fresh {
            states.insert_fresh(term);
        }
    }
    let sealed = object_seal(&keys.k_o, &obj.to_bytes(), rng);
    Ok((UpdateTokenSet { n, sides }, sealed))
}

/// Step 1 output: ID fields keyed by position address, sorted by address.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedView {
    pub fields: Vec<(Tag, PackedBitmap)>,
}

pub fn holder_mask<R: RngCore + CryptoRng>(
    index: &EncryptedIndex,
    k_p: &TagKey,
    pk: &PaillierPublicKey,
    rng: &mut R,
) -> Result<MaskedView> {
    let mut fields = index
        .entries
        .iter()
        .map(|e| Ok((position_address(k_p, &e.tag), e.id.rerandomize(pk, rng)?)))
        .collect::<Result<Vec<_>>>()?;
    fields.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(MaskedView { fields })
}

/// A fresh-keyword entry forwarded from the peer to the holder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreshEntry {
    pub label: TpfLabel,
    pub id: PackedBitmap,
    pub tag: Tag,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeOutput {
    pub view: MaskedView,
    pub fresh: Vec<FreshEntry>,
    /// Writes per position; every entry is written exactly once.
    pub touches: Vec<u32>,
}

fn pad<R: RngCore + CryptoRng>(
    field: &PackedBitmap,
    chunks: usize,
    pk: &PaillierPublicKey,
    rng: &mut R,
) -> Result<PackedBitmap> {
    let mut out = field.clone();
    while out.chunks.len() < chunks {
        out.chunks.push(tur_enc(&Default::default(), pk, rng)?);
    }
    Ok(out)
}

fn add_fields(pk: &PaillierPublicKey, a: &PackedBitmap, b: &PackedBitmap) -> Result<PackedBitmap> {
    if a.chunks.len() != b.chunks.len() {
        return Err(Error::LengthMismatch {
            left: a.chunks.len(),
            right: b.chunks.len(),
        });
    }
    Ok(PackedBitmap {
        chunks: a
            .chunks
            .iter()
            .zip(&b.chunks)
            .map(|(x, y)| tur_add(pk, x, y))
            .collect(),
    })
}

/// Step 2 at the peer.
pub fn peer_merge<R: RngCore + CryptoRng>(
    view: &MaskedView,
    tokens: &[UpdateToken],
    n: usize,
    params: &PackingParams,
    pk: &PaillierPublicKey,
    rng: &mut R,
) -> Result<MergeOutput> {
    let chunks = params.chunks_for(n);
    let mut deltas: HashMap<Tag, &PackedBitmap> = HashMap::new();
    let mut fresh = Vec::new();
    for t in tokens {
        match &t.target {
            TokenTarget::Address(a) => {
                deltas.insert(*a, &t.delta);
            }
            TokenTarget::Fresh { label, tag } => fresh.push(FreshEntry {
                label: label.clone(),
                id: pad(&t.delta, chunks, pk, rng)?.rerandomize(pk, rng)?,
                tag: *tag,
            }),
        }
    }
    let mut fields = Vec::with_capacity(view.fields.len());
    let mut matched = 0usize;
    for (addr, field) in &view.fields {
        let padded = pad(field, chunks, pk, rng)?;
        let written = match deltas.get(addr) {
            Some(delta) => {
                matched += 1;
                add_fields(pk, &padded, &pad(delta, chunks, pk, rng)?)?
            }
            None => padded,
        };
        fields.push((*addr, written.rerandomize(pk, rng)?));
    }
    if matched != deltas.len() {
        return Err(Error::UnmatchedAddress);
    }
    let touches = vec![1; fields.len()];
    Ok(MergeOutput {
        view: MaskedView { fields },
        fresh,
        touches,
    })
}

/// Step 3 at the holder.
pub fn holder_rebuild(
    index: &mut EncryptedIndex,
    merged: &MergeOutput,
    keys: &ServerKeys,
    group: &GroupParams,
    n: usize,
) -> Result<()> {
    let fields: HashMap<Tag, &PackedBitmap> =
        merged.view.fields.iter().map(|(a, f)| (*a, f)).collect();
    if fields.len() != index.entries.len() {
        return Err(Error::LengthMismatch {
            left: fields.len(),
            right: index.entries.len(),
        });
    }
    for e in &mut index.entries {
        let addr = position_address(&keys.k_p, &e.tag);
        e.id = (*fields.get(&addr).ok_or(Error::UnmatchedAddress)?).clone();
    }
    for f in &merged.fresh {
        index.entries.push(EncryptedIndexEntry {
            label: tpf_reenc(group, &f.label, &keys.rk_u_to_m)?,
            id: f.id.clone(),
            tag: f.tag,
        });
    }
    index.n = n;
    index.check_unique_labels()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{build_plain_indexes, encrypted_index_build, ServerIndexes};
    use crate::protocol::query::{
        client_recover, server_complete, server_resolve, token_generation, BooleanRangeQuery,
        RecoveryMode,
    };
    use crate::protocol::setup::{setup, KeyMaterial, SystemConfig};
    use crate::protocol::shuffle::index_shuffle_round;
    use crate::spatial::{GridSpec, HilbertValue, SpatialRange};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn apply(
        set: &UpdateTokenSet,
        servers: &mut [ServerIndexes; 2],
        km: &KeyMaterial,
        cfg: &SystemConfig,
        params: &PackingParams,
        rng: &mut ChaCha20Rng,
    ) {
        for slot in 0..2 {
            for kind in [IndexKind::Prefix, IndexKind::Keyword] {
                let keys = &km.servers[slot];
                let view = holder_mask(servers[slot].get(kind), &keys.k_p, &keys.pk, rng).unwrap();
                let merged =
                    peer_merge(&view, set.sides[slot].get(kind), set.n, params, &keys.pk, rng).unwrap();
                assert!(merged.touches.iter().all(|&t| t == 1));
                holder_rebuild(servers[slot].get_mut(kind), &merged, keys, &cfg.group, set.n).unwrap();
            }
        }
    }

    fn query(
        servers: &[ServerIndexes; 2],
        km: &KeyMaterial,
        cfg: &SystemConfig,
        params: &PackingParams,
        states: &ShuffleStateTable,
        q: &BooleanRangeQuery,
    ) -> std::collections::BTreeSet<u32> {
        let g = &cfg.group;
        let plan = token_generation(q, &km.client, states, g);
        let r1 = server_resolve(&plan.trapdoors, &servers[0], &km.servers[0], g).unwrap();
        let r2 = server_resolve(&plan.trapdoors, &servers[1], &km.servers[1], g).unwrap();
        let a = server_complete(&r1, &km.servers[1].d, &km.client.pk, params, RecoveryMode::Corrected).unwrap();
        let b = server_complete(&r2, &km.servers[0].d, &km.client.pk, params, RecoveryMode::Corrected).unwrap();
        client_recover(&a, &b, RecoveryMode::Corrected).unwrap()
    }

    #[test]
    fn inserted_objects_are_found_after_shuffles() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let cfg = SystemConfig::new(GridSpec::unit(3).unwrap(), 512);
        let km = setup(&cfg, &mut rng).unwrap();
        let params = PackingParams::for_key(&km.client.pk, 16).unwrap();
        // 27 objects so the third insertion crosses into a second chunk
        let mut db: Vec<_> = (0..27)
            .map(|i| SpatioTextualObject::new(i, HilbertValue(i as u64), ["old"]).unwrap())
            .collect();
        let plain = build_plain_indexes(&db, 6).unwrap();
        let mut servers = encrypted_index_build(
            &plain, &cfg.group, &km.owner.k_m, &km.owner.k_t, &km.client.pk, &params, &mut rng,
        )
        .unwrap();
        let mut states = ShuffleStateTable::new(plain.terms().map(|(t, _)| t));
        index_shuffle_round(&mut servers, &km.servers, &cfg.group, &mut rng).unwrap();
        states.advance();

        let inserts = [(60u64, vec!["old", "new"]), (61, vec!["new"]), (62, vec!["other"])];
        for (loc, kws) in inserts {
            let n = db.len();
            let obj = SpatioTextualObject::new(n as u32, HilbertValue(loc), kws).unwrap();
            let (set, _) = update_token_generation(
                &obj, n, &km.client, &mut states, &params, &cfg.group, 6, &mut rng,
            )
            .unwrap();
            assert_eq!(set.sides[0].prefix.len(), 6);
            assert_eq!(set.sides[1].keyword.len(), obj.keywords.len());
            apply(&set, &mut servers, &km, &cfg, &params, &mut rng);
            db.push(obj);
            index_shuffle_round(&mut servers, &km.servers, &cfg.group, &mut rng).unwrap();
            states.advance();
        }
        let r = |iv: (u64, u64)| SpatialRange::new(6, vec![iv]).unwrap();
        let q = BooleanRangeQuery::new(r((55, 63)), ["new"]).unwrap();
        assert_eq!(query(&servers, &km, &cfg, &params, &states, &q), [27, 28].into());
        let q = BooleanRangeQuery::new(r((0, 63)), ["old"]).unwrap();
        let expect: std::collections::BTreeSet<u32> = (0..28).collect();
        assert_eq!(query(&servers, &km, &cfg, &params, &states, &q), expect);
        let q = BooleanRangeQuery::new(r((62, 62)), ["other"]).unwrap();
        assert_eq!(query(&servers, &km, &cfg, &params, &states, &q), [29].into());
        assert!(servers.iter().all(|s| s.prefix.n == 30 && s.keyword.n == 30));
        assert_eq!(servers[0].prefix.entries[0].id.chunks.len(), 2);
    }

    #[test]
    fn empty_token_list_rerandomizes_only() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let cfg = SystemConfig::new(GridSpec::unit(3).unwrap(), 512);
        let km = setup(&cfg, &mut rng).unwrap();
        let params = PackingParams::for_key(&km.client.pk, 16).unwrap();
        let db = [SpatioTextualObject::new(0, HilbertValue(1), ["a"]).unwrap()];
        let plain = build_plain_indexes(&db, 6).unwrap();
        let mut servers = encrypted_index_build(
            &plain, &cfg.group, &km.owner.k_m, &km.owner.k_t, &km.client.pk, &params, &mut rng,
        )
        .unwrap();
        let before = servers[0].keyword.clone();
        let keys = &km.servers[0];
        let view = holder_mask(&servers[0].keyword, &keys.k_p, &keys.pk, &mut rng).unwrap();
        let merged = peer_merge(&view, &[], 1, &params, &keys.pk, &mut rng).unwrap();
        holder_rebuild(&mut servers[0].keyword, &merged, keys, &cfg.group, 1).unwrap();
        let kp = &km.owner.paillier;
        for (a, b) in before.entries.iter().zip(&servers[0].keyword.entries) {
            assert_eq!(a.label, b.label);
            assert_ne!(a.id, b.id);
            assert_eq!(a.id.decrypt(kp, 1, &params).unwrap(), b.id.decrypt(kp, 1, &params).unwrap());
        }
    }

    #[test]
    fn unmatched_address_is_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let cfg = SystemConfig::new(GridSpec::unit(3).unwrap(), 512);
        let km = setup(&cfg, &mut rng).unwrap();
        let params = PackingParams::for_key(&km.client.pk, 16).unwrap();
        let view = MaskedView { fields: vec![] };
        let tok = UpdateToken {
            target: TokenTarget::Address(Tag([7; 16])),
            delta: pack_bitmap(&Bitmap::zeros(1), &params, &km.client.pk, &mut rng).unwrap(),
        };
        assert_eq!(
            peer_merge(&view, &[tok], 1, &params, &km.client.pk, &mut rng),
            Err(Error::UnmatchedAddress)
        );
    }
}
