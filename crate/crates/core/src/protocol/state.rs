use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::crypto::group::GroupParams;
use crate::crypto::prf::{chain_step, prf_eval, DOMAIN_POSITION};
use crate::crypto::{ShareIndex, Tag, TagKey, TpfKey};
use crate::index::{initial_tag, Term};
use crate::protocol::setup::ClientKeys;

/// Client-side shuffle counters.
///
/// Terms present since the index build track the global epoch. Keywords
/// inserted later start counting at their insertion.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShuffleStateTable {
    pub epoch: u64,
    #[serde(with = "pairs")]
    pub counters: BTreeMap<Term, u64>,
}

/// Terms are not string keys, so the map travels as a pair list.
mod pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serializer};

    use crate::index::Term;

    pub fn serialize<S: Serializer>(m: &BTreeMap<Term, u64>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(m.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Term, u64>, D::Error> {
        Ok(Vec::<(Term, u64)>::deserialize(d)?.into_iter().collect())
    }
}

impl ShuffleStateTable {
    pub fn new(terms: impl IntoIterator<Item = Term>) -> Self {
        Self {
            epoch: 0,
            counters: terms.into_iter().map(|t| (t, 0)).collect(),
        }
    }

    pub fn contains(&self, term: &Term) -> bool {
        self.counters.contains_key(term)
    }

    /// Counter for a known term; unknown terms use the global epoch so their
    /// trapdoor never repeats an earlier or later insertion label.
    pub fn counter(&self, term: &Term) -> u64 {
        self.counters.get(term).copied().unwrap_or(self.epoch)
    }

    pub fn insert_fresh(&mut self, term: Term) {
        self.counters.insert(term, 0);
    }

    pub fn advance(&mut self) {
        self.epoch += 1;
        for c in self.counters.values_mut() {
            *c += 1;
        }
    }
}

/// `advance_states`: every counter and the epoch move forward by one.
pub fn advance_states(table: &ShuffleStateTable) -> ShuffleStateTable {
    let mut t = table.clone();
    t.advance();
    t
}

/// Trapdoor key `k_u * (r1 r2)^U`.
pub fn term_key(group: &GroupParams, keys: &ClientKeys, counter: u64) -> TpfKey {
    keys.k_u.advanced(group, &keys.r1, &keys.r2, counter)
}

/// Tag of `term` on `side` after `counter` shuffle rounds. Side one is
/// processed by the second server first, side two by the first.
pub fn current_tag(
    group: &GroupParams,
    keys: &ClientKeys,
    side: ShareIndex,
    term: &Term,
    counter: u64,
) -> Tag {
    let (r1, r2) = keys.chain_inputs(group);
    let (first, second) = match side {
        ShareIndex::One => (r2, r1),
        ShareIndex::Two => (r1, r2),
    };
    let mut tau = initial_tag(&keys.k_t, side, term);
    for _ in 0..counter {
        tau = chain_step(&chain_step(&tau, &first), &second);
    }
    tau
}

/// `P_k(tau)`: the position address of an entry with tag `tau`.
pub fn position_address(k_p: &TagKey, tau: &Tag) -> Tag {
    prf_eval(k_p.as_bytes(), DOMAIN_POSITION, tau.as_bytes())
}
