use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::grid::{GridSpec, Rect};
use crate::spatial::hilbert::cell_rect_intervals;
use crate::spatial::prefix::{prefix_family, PrefixElement};

/// Sorted, disjoint, non-adjacent inclusive intervals of Hilbert values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpatialRange {
    bits: u8,
    intervals: Vec<(u64, u64)>,
}

impl SpatialRange {
    /// Normalizes arbitrary intervals: sorts them and merges overlapping or
    /// adjacent runs.
    pub fn new(bits: u8, mut intervals: Vec<(u64, u64)>) -> Result<Self> {
        if bits == 0 || bits > 64 {
            return Err(Error::InvalidRange(format!("bit width {bits}")));
        }
        let max = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        for &(lo, hi) in &intervals {
            if lo > hi || hi > max {
                return Err(Error::InvalidRange(format!("[{lo}, {hi}] in {bits} bits")));
            }
        }
        intervals.sort_unstable();
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(intervals.len());
        for (lo, hi) in intervals {
            match merged.last_mut() {
                Some(last) if lo <= last.1.saturating_add(1) => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Ok(Self {
            bits,
            intervals: merged,
        })
    }

    pub fn empty(bits: u8) -> Self {
        Self {
            bits,
            intervals: Vec::new(),
        }
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn intervals(&self) -> &[(u64, u64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.intervals
            .iter()
            .any(|&(lo, hi)| (lo..=hi).contains(&x))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeCover {
    pub elements: BTreeSet<PrefixElement>,
}

impl RangeCover {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PrefixElement> {
        self.elements.iter()
    }

    /// The cover rewritten without the all-wildcard element (which no index
    /// stores) by replacing it with its two children.
    pub fn indexable(&self) -> RangeCover {
        let mut elements = BTreeSet::new();
        for e in &self.elements {
            match (e.is_all_wildcard(), e.children()) {
                (true, Some(kids)) => elements.extend(kids),
                _ => {
                    elements.insert(*e);
                }
            }
        }
        RangeCover { elements }
    }
}

impl FromIterator<PrefixElement> for RangeCover {
    fn from_iter<T: IntoIterator<Item = PrefixElement>>(iter: T) -> Self {
        Self {
            elements: iter.into_iter().collect(),
        }
    }
}

/// Decomposes each interval into maximal aligned blocks, walking left to
/// right; the union of the per-interval covers is exact and minimal because
/// the intervals are non-adjacent.
pub fn min_prefix_cover(range: &SpatialRange) -> RangeCover {
    let width = range.bits;
    let mut elements = BTreeSet::new();
    for &(lo, hi) in &range.intervals {
        let mut cur = lo;
        loop {
            // largest k with cur aligned to 2^k and cur + 2^k - 1 <= hi
            let mut k = if cur == 0 {
                width as u32
            } else {
                cur.trailing_zeros().min(width as u32)
            };
            while k > 0 && (k >= 64 || cur + ((1u64 << k) - 1) > hi) {
                if k >= 64 && cur == 0 && hi == u64::MAX {
                    break;
                }
                k -= 1;
            }
            elements.insert(PrefixElement::of_value(cur, width - k as u8, width));
            let step_end = if k >= 64 { u64::MAX } else { cur + ((1u64 << k) - 1) };
            if step_end >= hi {
                break;
            }
            cur = step_end + 1;
        }
    }
    RangeCover { elements }
}

/// `P(x)` intersects the cover.
pub fn membership_check(x: u64, cover: &RangeCover) -> bool {
    let Some(width) = cover.elements.iter().next().map(|e| e.width()) else {
        return false;
    };
    match prefix_family(x, width) {
        Ok(fam) => fam.iter().any(|e| cover.elements.contains(e)),
        Err(_) => false,
    }
}

/// Hilbert intervals of the cells touched by `rect`; empty when the rectangle
/// misses the grid.
pub fn region_to_intervals(rect: &Rect, grid: &GridSpec) -> SpatialRange {
    match grid.cell_rect(rect) {
        Some(cells) => SpatialRange {
            bits: grid.bits(),
            intervals: cell_rect_intervals(&cells, grid),
        },
        None => SpatialRange::empty(grid.bits()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cover_strings(lo: u64, hi: u64) -> Vec<String> {
        let r = SpatialRange::new(6, vec![(lo, hi)]).unwrap();
        sorted_strings(&min_prefix_cover(&r))
    }

    fn sorted_strings(cover: &RangeCover) -> Vec<String> {
        let mut v: Vec<String> = cover.iter().map(ToString::to_string).collect();
        v.sort();
        v
    }

    fn covered_values(cover: &RangeCover) -> BTreeSet<u64> {
        cover
            .iter()
            .flat_map(|e| {
                let (lo, hi) = e.span();
                lo..=hi
            })
            .collect()
    }

    #[test]
    fn worked_covers() {
        assert_eq!(cover_strings(20, 24), ["0101**", "011000"]);
        assert_eq!(cover_strings(0, 63), ["******"]);
        assert_eq!(cover_strings(45, 51), ["101101", "10111*", "1100**"]);
        assert_eq!(cover_strings(54, 55), ["11011*"]);
        assert_eq!(cover_strings(7, 7), ["000111"]);
    }

    #[test]
    fn multi_interval_cover_is_union() {
        let r = SpatialRange::new(6, vec![(54, 55), (45, 51)]).unwrap();
        let got = sorted_strings(&min_prefix_cover(&r));
        assert_eq!(got, ["101101", "10111*", "1100**", "11011*"]);
    }

    #[test]
    fn indexable_cover_splits_root() {
        let r = SpatialRange::new(6, vec![(0, 63)]).unwrap();
        let c = min_prefix_cover(&r).indexable();
        let got: Vec<String> = c.iter().map(ToString::to_string).collect();
        assert_eq!(got, ["0*****", "1*****"]);
    }

    #[test]
    fn membership_examples() {
        let r = SpatialRange::new(6, vec![(20, 24)]).unwrap();
        let c = min_prefix_cover(&r);
        assert!(membership_check(21, &c));
        assert!(!membership_check(25, &c));
        assert!(!membership_check(21, &RangeCover::default()));
    }

    #[test]
    fn range_normalization() {
        let r = SpatialRange::new(6, vec![(5, 9), (0, 2), (3, 4), (20, 20)]).unwrap();
        assert_eq!(r.intervals(), &[(0, 9), (20, 20)]);
        assert!(SpatialRange::new(6, vec![(5, 4)]).is_err());
        assert!(SpatialRange::new(6, vec![(0, 64)]).is_err());
    }

    #[test]
    fn exact_cover_for_every_interval_at_six_bits() {
        for lo in 0..64u64 {
            for hi in lo..64u64 {
                let r = SpatialRange::new(6, vec![(lo, hi)]).unwrap();
                let c = min_prefix_cover(&r);
                assert_eq!(covered_values(&c), (lo..=hi).collect::<BTreeSet<_>>());
                for x in 0..64 {
                    assert_eq!(membership_check(x, &c), (lo..=hi).contains(&x));
                }
            }
        }
    }

    #[test]
    fn whole_grid_and_single_cell_rects() {
        let g = GridSpec::new(0.0, 0.0, 8.0, 8.0, 3).unwrap();
        let all = region_to_intervals(&Rect { x1: 0.0, y1: 0.0, x2: 8.0, y2: 8.0 }, &g);
        assert_eq!(all.intervals(), &[(0, 63)]);
        let one = region_to_intervals(&Rect { x1: 0.5, y1: 6.5, x2: 0.6, y2: 6.6 }, &g);
        assert_eq!(one.intervals(), &[(20, 20)]);
        let none = region_to_intervals(&Rect { x1: 10.0, y1: 10.0, x2: 11.0, y2: 11.0 }, &g);
        assert!(none.is_empty());
    }

    proptest! {
        #[test]
        fn membership_equals_interval_test(
            bits in 2u8..=16,
            raw in proptest::collection::vec((any::<u64>(), any::<u64>()), 1..4),
            probes in proptest::collection::vec(any::<u64>(), 32),
        ) {
            let max = (1u64 << bits) - 1;
            let intervals: Vec<_> = raw
                .iter()
                .map(|&(a, b)| {
                    let (a, b) = (a & max, b & max);
                    (a.min(b), a.max(b))
                })
                .collect();
            let r = SpatialRange::new(bits, intervals).unwrap();
            let c = min_prefix_cover(&r);
            for p in probes {
                let x = p & max;
                prop_assert_eq!(membership_check(x, &c), r.contains(x));
            }
            // no proper subset still covers: every element matches a value no other element does
            for e in c.iter() {
                let (lo, _) = e.span();
                prop_assert!(c.iter().filter(|o| o.covers(lo)).count() == 1);
            }
        }
    }
}
