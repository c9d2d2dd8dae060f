use std::collections::BTreeSet;

use brasp_core::index::SpatioTextualObject;
use brasp_core::protocol::BooleanRangeQuery;

/// Plaintext answer: objects located in the range that carry every query
/// keyword.
pub fn pbrq_oracle(db: &[SpatioTextualObject], q: &BooleanRangeQuery) -> BTreeSet<u32> {
    db.iter()
        .filter(|o| q.range.contains(o.loc.0) && q.keywords.is_subset(&o.keywords))
        .map(|o| o.id)
        .collect()
}

/// The same answer by a different route: expand the range into cells and
/// scan objects against each query keyword separately.
pub fn naive_oracle(db: &[SpatioTextualObject], q: &BooleanRangeQuery) -> BTreeSet<u32> {
    let mut cells = BTreeSet::new();
    for &(lo, hi) in q.range.intervals() {
        for v in lo..=hi {
            cells.insert(v);
        }
    }
    let mut out = BTreeSet::new();
    for o in db {
        if !cells.contains(&o.loc.0) {
            continue;
        }
        let mut all = true;
        for w in &q.keywords {
            if !o.keywords.iter().any(|k| k == w) {
                all = false;
                break;
            }
        }
        if all {
            out.insert(o.id);
        }
    }
    out
}
