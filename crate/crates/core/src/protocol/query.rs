use std::collections::BTreeSet;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::crypto::group::GroupParams;
use crate::crypto::{
    tpf_reenc, tpf_rnd, tur_dec, tur_pdec, PartialDecKey, PartialDecryption, PaillierPublicKey,
    ShareIndex, TpfLabel,
};
use crate::error::{Error, Result};
use crate::index::packing::unpack_plain;
use crate::index::{
    combine_shares, normalize_keyword, pack_bitmap, split_shares, Bitmap, IndexKind,
    PackedBitmap, PackingParams, ServerIndexes, SpatioTextualObject, Term,
};
use crate::protocol::setup::{ClientKeys, ServerKeys};
use crate::protocol::state::{term_key, ShuffleStateTable};
use crate::spatial::{min_prefix_cover, region_to_intervals, GridSpec, Rect, SpatialRange};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BooleanRangeQuery {
    pub range: SpatialRange,
    /// Normalized keywords; empty means a range-only query.
    pub keywords: BTreeSet<String>,
}

impl BooleanRangeQuery {
    pub fn new<I, S>(range: SpatialRange, keywords: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let keywords = keywords
            .into_iter()
            .map(|k| normalize_keyword(k.as_ref()))
            .collect::<Result<_>>()?;
        Ok(Self { range, keywords })
    }

    pub fn from_rect<I, S>(rect: &Rect, grid: &GridSpec, keywords: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self::new(region_to_intervals(rect, grid), keywords)
    }

    /// Cover prefixes followed by keywords; the order trapdoors are sent in.
    pub fn terms(&self) -> Vec<Term> {
        let cover = min_prefix_cover(&self.range).indexable();
        cover
            .iter()
            .map(|p| Term::Prefix(*p))
            .chain(self.keywords.iter().map(|w| Term::Keyword(w.clone())))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapdoorSet {
    pub prefix: Vec<TpfLabel>,
    pub keyword: Vec<TpfLabel>,
}

impl TrapdoorSet {
    pub fn len(&self) -> usize {
        self.prefix.len() + self.keyword.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Trapdoors in send order, tagged with the index each one targets.
    pub fn iter(&self) -> impl Iterator<Item = (IndexKind, &TpfLabel)> {
        self.prefix
            .iter()
            .map(|t| (IndexKind::Prefix, t))
            .chain(self.keyword.iter().map(|t| (IndexKind::Keyword, t)))
    }
}

/// The client's record of one issued query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryPlan {
    pub terms: Vec<Term>,
    pub trapdoors: TrapdoorSet,
}

impl QueryPlan {
    pub fn prefix_count(&self) -> usize {
        self.trapdoors.prefix.len()
    }
}

pub fn token_generation(
    q: &BooleanRangeQuery,
    keys: &ClientKeys,
    states: &ShuffleStateTable,
    group: &GroupParams,
) -> QueryPlan {
    let terms = q.terms();
    let mut trapdoors = TrapdoorSet {
        prefix: Vec::new(),
        keyword: Vec::new(),
    };
    for term in &terms {
        let k = term_key(group, keys, states.counter(term));
        let t = tpf_rnd(group, &k, &term.canonical_bytes());
        match term.kind() {
            IndexKind::Prefix => trapdoors.prefix.push(t),
            IndexKind::Keyword => trapdoors.keyword.push(t),
        }
    }
    QueryPlan { terms, trapdoors }
}

/// Partially decrypted ID field of one resolved term; `None` when no entry
/// carries the trapdoor's label.
pub type ResolvedTerm = Option<Vec<PartialDecryption>>;

/// Output of one server's resolution pass, sent to its peer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedTerms {
    pub side: ShareIndex,
    pub n: usize,
    pub prefix_count: usize,
    pub terms: Vec<ResolvedTerm>,
}

/// Re-encrypts each trapdoor to the master key, finds its entry and
/// partially decrypts the entry's ID field with the local share key.
pub fn server_resolve(
    trapdoors: &TrapdoorSet,
    indexes: &ServerIndexes,
    keys: &ServerKeys,
    group: &GroupParams,
) -> Result<ResolvedTerms> {
    let prefix_pos = indexes.prefix.label_positions();
    let keyword_pos = indexes.keyword.label_positions();
    let mut terms = Vec::with_capacity(trapdoors.len());
    for (kind, t) in trapdoors.iter() {
        let label = tpf_reenc(group, t, &keys.rk_u_to_m)?;
        let pos = match kind {
            IndexKind::Prefix => prefix_pos.get(label.as_bytes()),
            IndexKind::Keyword => keyword_pos.get(label.as_bytes()),
        };
        terms.push(match pos {
            Some(&i) => Some(
                indexes.get(kind).entries[i]
                    .id
                    .chunks
                    .iter()
                    .map(|c| tur_pdec(c, &keys.d, &keys.pk))
                    .collect::<Result<_>>()?,
            ),
            None => None,
        });
    }
    Ok(ResolvedTerms {
        side: indexes.side,
        n: indexes.prefix.n,
        prefix_count: trapdoors.prefix.len(),
        terms,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecoveryMode {
    /// Combine shares per term at the client, then evaluate the query.
    Corrected,
    /// Each server intersects within its own share; the client unions.
    Literal,
}

/// A server's answer to the client about the peer's share.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResponse {
    /// Share the bitmaps belong to.
    pub side: ShareIndex,
    pub n: usize,
    pub prefix_count: usize,
    pub bitmaps: Vec<Option<Bitmap>>,
    /// Literal mode only: ids matched within this share alone.
    pub candidates: Vec<u32>,
}

fn evaluate(
    bitmaps: &[Option<Bitmap>],
    prefix_count: usize,
    n: usize,
) -> Result<Bitmap> {
    let zero = Bitmap::zeros(n);
    let (prefix, keyword) = bitmaps.split_at(prefix_count.min(bitmaps.len()));
    let mut in_range = zero.clone();
    for b in prefix {
        in_range = in_range.or(b.as_ref().unwrap_or(&zero))?;
    }
    let mut result = in_range;
    for b in keyword {
        result = result.and(b.as_ref().unwrap_or(&zero))?;
    }
    Ok(result)
}

/// Completes the peer's partial decryptions with the local share key.
pub fn server_complete(
    resolved: &ResolvedTerms,
    d_self: &PartialDecKey,
    pk: &PaillierPublicKey,
    params: &PackingParams,
    mode: RecoveryMode,
) -> Result<SearchResponse> {
    let mut bitmaps = Vec::with_capacity(resolved.terms.len());
    for term in &resolved.terms {
        bitmaps.push(match term {
            Some(chunks) => {
                let values = chunks
                    .iter()
                    .map(|pd| tur_dec(pd, d_self, pk))
                    .collect::<Result<Vec<_>>>()?;
                Some(unpack_plain(&values, resolved.n, params)?)
            }
            None => None,
        });
    }
    let candidates = match mode {
        RecoveryMode::Corrected => Vec::new(),
        RecoveryMode::Literal => evaluate(&bitmaps, resolved.prefix_count, resolved.n)?
            .iter_ones()
            .map(|i| i as u32)
            .collect(),
    };
    Ok(SearchResponse {
        side: resolved.side,
        n: resolved.n,
        prefix_count: resolved.prefix_count,
        bitmaps,
        candidates,
    })
}

/// Full per-term bitmaps from the two responses; `None` when neither side
/// holds an entry.
pub fn combined_bitmaps(
    resp1: &SearchResponse,
    resp2: &SearchResponse,
) -> Result<Vec<Option<Bitmap>>> {
    if resp1.bitmaps.len() != resp2.bitmaps.len() {
        return Err(Error::LengthMismatch {
            left: resp1.bitmaps.len(),
            right: resp2.bitmaps.len(),
        });
    }
    if resp1.n != resp2.n {
        return Err(Error::LengthMismatch {
            left: resp1.n,
            right: resp2.n,
        });
    }
    let zero = Bitmap::zeros(resp1.n);
    resp1
        .bitmaps
        .iter()
        .zip(&resp2.bitmaps)
        .map(|(a, b)| match (a, b) {
            (None, None) => Ok(None),
            _ => combine_shares(a.as_ref().unwrap_or(&zero), b.as_ref().unwrap_or(&zero)).map(Some),
        })
        .collect()
}

/// Matching object ids.
pub fn client_recover(
    resp1: &SearchResponse,
    resp2: &SearchResponse,
    mode: RecoveryMode,
) -> Result<BTreeSet<u32>> {
    match mode {
        RecoveryMode::Corrected => {
            let full = combined_bitmaps(resp1, resp2)?;
            Ok(evaluate(&full, resp1.prefix_count, resp1.n)?
                .iter_ones()
                .map(|i| i as u32)
                .collect())
        }
        RecoveryMode::Literal => Ok(resp1
            .candidates
            .iter()
            .chain(&resp2.candidates)
            .copied()
            .collect()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultSet {
    pub ids: BTreeSet<u32>,
    pub objects: Vec<SpatioTextualObject>,
}

/// A replacement ID field, addressed by the trapdoor used in the search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Redistribution {
    pub kind: IndexKind,
    pub trapdoor: TpfLabel,
    pub id: PackedBitmap,
}

/// Fresh disjoint re-split of every resolved term's full bitmap. Returns the
/// payloads for side one and side two.
pub fn index_redistribution<R: RngCore + CryptoRng>(
    plan: &QueryPlan,
    full: &[Option<Bitmap>],
    pk: &PaillierPublicKey,
    params: &PackingParams,
    rng: &mut R,
) -> Result<[Vec<Redistribution>; 2]> {
    if full.len() != plan.terms.len() {
        return Err(Error::LengthMismatch {
            left: full.len(),
            right: plan.terms.len(),
        });
    }
    let mut out = [Vec::new(), Vec::new()];
    for ((kind, t), b) in plan.trapdoors.iter().zip(full) {
        let Some(b) = b else { continue };
        let shares = split_shares(b, rng);
        for (slot, share) in [&shares.one, &shares.two].into_iter().enumerate() {
            out[slot].push(Redistribution {
                kind,
                trapdoor: t.clone(),
                id: pack_bitmap(share, params, pk, rng)?,
            });
        }
    }
    Ok(out)
}

/// Replaces ID fields in place.
pub fn apply_redistribution(
    items: &[Redistribution],
    indexes: &mut ServerIndexes,
    keys: &ServerKeys,
    group: &GroupParams,
) -> Result<()> {
    for (i, item) in items.iter().enumerate() {
        let label = tpf_reenc(group, &item.trapdoor, &keys.rk_u_to_m)?;
        let index = indexes.get_mut(item.kind);
        let pos = index
            .entries
            .iter()
            .position(|e| e.label == label)
            .ok_or(Error::UnresolvedTerm(i))?;
        index.entries[pos].id = item.id.clone();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{tpf_rnd, TpfKey};
    use crate::index::{build_plain_indexes, encrypted_index_build};
    use crate::protocol::setup::{setup, KeyMaterial, SystemConfig};
    use crate::spatial::HilbertValue;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    struct Fixture {
        cfg: SystemConfig,
        km: KeyMaterial,
        params: PackingParams,
        servers: [ServerIndexes; 2],
        states: ShuffleStateTable,
        rng: ChaCha20Rng,
    }

    fn fixture(db: &[SpatioTextualObject]) -> Fixture {
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let cfg = SystemConfig::new(GridSpec::unit(3).unwrap(), 512);
        let km = setup(&cfg, &mut rng).unwrap();
        let params = PackingParams::for_key(&km.client.pk, cfg.slot_bits).unwrap();
        let plain = build_plain_indexes(db, 6).unwrap();
        let servers = encrypted_index_build(
            &plain,
            &cfg.group,
            &km.owner.k_m,
            &km.owner.k_t,
            &km.client.pk,
            &params,
            &mut rng,
        )
        .unwrap();
        let states = ShuffleStateTable::new(plain.terms().map(|(t, _)| t));
        Fixture {
            cfg,
            km,
            params,
            servers,
            states,
            rng,
        }
    }

    fn run(f: &Fixture, q: &BooleanRangeQuery, mode: RecoveryMode) -> (QueryPlan, SearchResponse, SearchResponse) {
        let g = &f.cfg.group;
        let plan = token_generation(q, &f.km.client, &f.states, g);
        let r1 = server_resolve(&plan.trapdoors, &f.servers[0], &f.km.servers[0], g).unwrap();
        let r2 = server_resolve(&plan.trapdoors, &f.servers[1], &f.km.servers[1], g).unwrap();
        // each server completes the other's partials
        let resp1 = server_complete(&r1, &f.km.servers[1].d, &f.km.client.pk, &f.params, mode).unwrap();
        let resp2 = server_complete(&r2, &f.km.servers[0].d, &f.km.client.pk, &f.params, mode).unwrap();
        (plan, resp1, resp2)
    }

    fn obj(id: u32, loc: u64, kws: &[&str]) -> SpatioTextualObject {
        SpatioTextualObject::new(id, HilbertValue(loc), kws.iter().copied()).unwrap()
    }

    fn range(iv: &[(u64, u64)]) -> SpatialRange {
        SpatialRange::new(6, iv.to_vec()).unwrap()
    }

    #[test]
    fn zero_epoch_trapdoor_is_plain_rnd() {
        let f = fixture(&[obj(0, 3, &["a"])]);
        let q = BooleanRangeQuery::new(range(&[(3, 3)]), ["a"]).unwrap();
        let plan = token_generation(&q, &f.km.client, &f.states, &f.cfg.group);
        assert_eq!(plan.trapdoors.prefix.len(), 1);
        assert_eq!(
            plan.trapdoors.keyword[0],
            tpf_rnd(&f.cfg.group, &f.km.client.k_u, &Term::Keyword("a".into()).canonical_bytes())
        );
    }

    #[test]
    fn unknown_keyword_resolves_to_no_entry() {
        let f = fixture(&[obj(0, 3, &["a"]), obj(1, 40, &["b"])]);
        let q = BooleanRangeQuery::new(range(&[(0, 63)]), ["zzz"]).unwrap();
        let (_, r1, r2) = run(&f, &q, RecoveryMode::Corrected);
        assert_eq!(r1.bitmaps.last().unwrap(), &None);
        assert!(client_recover(&r1, &r2, RecoveryMode::Corrected).unwrap().is_empty());
        // and a range-only query over the whole grid returns everything
        let q = BooleanRangeQuery::new(range(&[(0, 63)]), Vec::<String>::new()).unwrap();
        let (_, r1, r2) = run(&f, &q, RecoveryMode::Corrected);
        assert_eq!(
            client_recover(&r1, &r2, RecoveryMode::Corrected).unwrap(),
            [0, 1].into()
        );
    }

    #[test]
    fn per_term_bitmaps_equal_plain_shares() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        use rand::Rng;
        let db: Vec<_> = (0..32)
            .map(|i| obj(i, rng.gen_range(0..64), &[["a", "b", "c"][rng.gen_range(0..3)]]))
            .collect();
        let f = fixture(&db);
        let q = BooleanRangeQuery::new(range(&[(10, 50)]), ["a", "b"]).unwrap();
        let (plan, r1, r2) = run(&f, &q, RecoveryMode::Corrected);
        let kp = &f.km.owner.paillier;
        let k_m: &TpfKey = &f.km.owner.k_m;
        for (i, term) in plan.terms.iter().enumerate() {
            let label = tpf_rnd(&f.cfg.group, k_m, &term.canonical_bytes());
            for (resp, srv) in [(&r1, &f.servers[0]), (&r2, &f.servers[1])] {
                let idx = srv.get(term.kind());
                let e = idx.entries.iter().find(|e| e.label == label).unwrap();
                let plain = e.id.decrypt(kp, 32, &f.params).unwrap();
                assert_eq!(resp.bitmaps[i].as_ref().unwrap(), &plain);
            }
        }
    }

    #[test]
    fn literal_mode_misses_split_keywords() {
        // one object with two keywords; find a seed where its two keyword
        // bits land in different shares
        let db = [obj(0, 5, &["x", "y"])];
        for seed in 0..64u64 {
            let mut f = fixture(&db);
            f.rng = ChaCha20Rng::seed_from_u64(seed);
            let plain = build_plain_indexes(&db, 6).unwrap();
            f.servers = encrypted_index_build(
                &plain,
                &f.cfg.group,
                &f.km.owner.k_m,
                &f.km.owner.k_t,
                &f.km.client.pk,
                &f.params,
                &mut f.rng,
            )
            .unwrap();
            let q = BooleanRangeQuery::new(range(&[(0, 63)]), ["x", "y"]).unwrap();
            let (_, r1, r2) = run(&f, &q, RecoveryMode::Literal);
            let n_terms = r1.bitmaps.len();
            let x_in_one = r1.bitmaps[n_terms - 2].as_ref().unwrap().get(0);
            let y_in_one = r1.bitmaps[n_terms - 1].as_ref().unwrap().get(0);
            if x_in_one != y_in_one {
                assert!(client_recover(&r1, &r2, RecoveryMode::Literal).unwrap().is_empty());
                assert_eq!(
                    client_recover(&r1, &r2, RecoveryMode::Corrected).unwrap(),
                    [0].into()
                );
                return;
            }
        }
        panic!("no split found in 64 seeds");
    }

    #[test]
    fn redistribution_preserves_combined_bitmaps() {
        let db: Vec<_> = (0..10).map(|i| obj(i, i as u64 * 6, &["a"])).collect();
        let mut f = fixture(&db);
        let q = BooleanRangeQuery::new(range(&[(0, 40)]), ["a"]).unwrap();
        let (plan, r1, r2) = run(&f, &q, RecoveryMode::Corrected);
        let before = client_recover(&r1, &r2, RecoveryMode::Corrected).unwrap();
        let full = combined_bitmaps(&r1, &r2).unwrap();
        let untouched_before = f.servers[0].prefix.entries.clone();
        let [p1, p2] =
            index_redistribution(&plan, &full, &f.km.client.pk, &f.params, &mut f.rng).unwrap();
        assert_eq!(p1.len(), plan.terms.len());
        apply_redistribution(&p1, &mut f.servers[0], &f.km.servers[0], &f.cfg.group).unwrap();
        apply_redistribution(&p2, &mut f.servers[1], &f.km.servers[1], &f.cfg.group).unwrap();
        let (_, r1b, r2b) = run(&f, &q, RecoveryMode::Corrected);
        assert_eq!(combined_bitmaps(&r1b, &r2b).unwrap(), full);
        assert_eq!(client_recover(&r1b, &r2b, RecoveryMode::Corrected).unwrap(), before);
        let changed = f.servers[0]
            .prefix
            .entries
            .iter()
            .zip(&untouched_before)
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(changed, plan.prefix_count());
    }
}
