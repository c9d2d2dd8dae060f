pub mod grid;
pub mod hilbert;
pub mod prefix;
pub mod range;

pub use grid::{Cell, CellRect, GridSpec, Rect};
pub use hilbert::{cell_rect_intervals, hilbert_decode, hilbert_encode, HilbertValue};
pub use prefix::{prefix_family, prefix_universe, prefix_universe_size, PrefixElement};
pub use range::{membership_check, min_prefix_cover, region_to_intervals, RangeCover, SpatialRange};
