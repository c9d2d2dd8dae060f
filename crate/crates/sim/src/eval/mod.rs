//! Oracles, leakage measurements and benchmarks.

pub mod bench;
pub mod cover;
pub mod forward;
pub mod inspect;
pub mod linkage;
pub mod oracle;
pub mod patterns;
pub mod stats;

pub use bench::{bench, BenchRecord, Suite, Workload};
pub use cover::min_cover_oracle;
pub use forward::{forward_scan, ForwardReport};
pub use inspect::logical_bitmaps;
pub use linkage::{adversary_linkage, position_persistence, LinkageReport, StrategyResult};
pub use oracle::{naive_oracle, pbrq_oracle};
pub use patterns::{pattern_matrices, PatternMatrix};
