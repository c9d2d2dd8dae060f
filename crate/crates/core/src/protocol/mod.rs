//! The client and server sides of search, shuffle and update, as pure
//! functions over explicit state. Message transport lives elsewhere.

pub mod query;
pub mod setup;
pub mod shuffle;
pub mod state;
pub mod update;

pub use query::{
    apply_redistribution, client_recover, combined_bitmaps, index_redistribution,
    server_complete, server_resolve, token_generation, BooleanRangeQuery, QueryPlan,
    RecoveryMode, Redistribution, ResolvedTerm, ResolvedTerms, ResultSet, SearchResponse,
    TrapdoorSet,
};
pub use setup::{setup, ClientKeys, KeyMaterial, OwnerKeys, ServerKeys, SystemConfig};
pub use shuffle::{index_fingerprints, index_shuffle_round, server_hop, shuffle_hop};
pub use state::{advance_states, current_tag, position_address, term_key, ShuffleStateTable};
pub use update::{
    holder_mask, holder_rebuild, peer_merge, update_token_generation, FreshEntry, MaskedView,
    MergeOutput, SideTokens, TokenTarget, UpdateToken, UpdateTokenSet,
};
