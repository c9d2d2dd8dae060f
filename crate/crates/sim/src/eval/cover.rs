//! Exhaustive minimum prefix cover, independent of the production routine.

use std::collections::BTreeSet;

use brasp_core::spatial::{PrefixElement, SpatialRange};

use crate::error::{SimError, SimResult};

pub const MAX_ORACLE_BITS: u8 = 10;

/// Searches every exact cover of `range` by pairwise disjoint prefixes and
/// returns one of minimum size. Overlapping covers never help: dropping a
/// prefix contained in another keeps the union.
pub fn min_cover_oracle(range: &SpatialRange) -> SimResult<BTreeSet<PrefixElement>> {
    let bits = range.bits();
    if bits > MAX_ORACLE_BITS {
        return Err(SimError::Input(format!(
            "exhaustive cover needs at most {MAX_ORACLE_BITS} bits, got {bits}"
        )));
    }
    let member: Vec<bool> = (0..1u64 << bits).map(|v| range.contains(v)).collect();
    Ok(search(&member, 0, 0, bits).into_iter().collect())
}

/// Minimum exact cover of the members under trie node `(value, len)`:
/// either the node itself, when all of its span is in range, or the best
/// covers of its two children.
fn search(member: &[bool], value: u64, len: u8, bits: u8) -> Vec<PrefixElement> {
    let free = bits - len;
    let lo = (value << free) as usize;
    let block = &member[lo..lo + (1usize << free)];
    if block.iter().all(|m| !m) {
        return Vec::new();
    }
    let whole = block.iter().all(|&m| m);
    if free == 0 {
        return vec![PrefixElement::new(value, len, bits).expect("valid node")];
    }
    let mut split = search(member, value << 1, len + 1, bits);
    split.extend(search(member, (value << 1) | 1, len + 1, bits));
    // one prefix is never worse than a nonempty split
    if whole && !split.is_empty() {
        vec![PrefixElement::new(value, len, bits).expect("valid node")]
    } else {
        split
    }
}
