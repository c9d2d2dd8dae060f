//! A five-object sample on the order-3 grid, small enough to check by hand.
//!
//! | id | Hilbert value | keywords   |
//! |----|---------------|------------|
//! | 0  | 5             | w1 w2      |
//! | 1  | 49            | w3 w4      |
//! | 2  | 60            | w2 w5 w8   |
//! | 3  | 21            | w1 w6 w7   |
//! | 4  | 46            | w4 w6 w8   |
//!
//! The sample range is `[45, 51] ∪ [54, 55]`, which holds objects 1 and 4;
//! with keywords `w4` and `w6` only object 4 matches.

use brasp_core::index::SpatioTextualObject;
use brasp_core::protocol::BooleanRangeQuery;
use brasp_core::spatial::{GridSpec, HilbertValue, SpatialRange};

use crate::error::SimResult;

pub const SAMPLE_ORDER: u8 = 3;

pub fn sample_grid() -> GridSpec {
    GridSpec::unit(SAMPLE_ORDER).expect("order 3 is valid")
}

pub fn sample_objects() -> SimResult<Vec<SpatioTextualObject>> {
    let rows: [(u64, &[&str]); 5] = [
        (5, &["w1", "w2"]),
        (49, &["w3", "w4"]),
        (60, &["w2", "w5", "w8"]),
        (21, &["w1", "w6", "w7"]),
        (46, &["w4", "w6", "w8"]),
    ];
    rows.iter()
        .enumerate()
        .map(|(i, (loc, kw))| Ok(SpatioTextualObject::new(i as u32, HilbertValue(*loc), kw.iter())?))
        .collect()
}

pub fn sample_range() -> SimResult<SpatialRange> {
    Ok(SpatialRange::new(2 * SAMPLE_ORDER, vec![(45, 51), (54, 55)])?)
}

pub fn sample_query() -> SimResult<BooleanRangeQuery> {
    Ok(BooleanRangeQuery::new(sample_range()?, ["w4", "w6"])?)
}
