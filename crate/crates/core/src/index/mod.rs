pub mod bitmap;
pub mod build;
pub mod object;
pub mod packing;

pub use bitmap::{combine_shares, split_shares, Bitmap, ShareBitmap};
pub use build::{
    build_plain_indexes, encrypted_index_build, initial_tag, EncryptedIndex, EncryptedIndexEntry,
    PlainIndexes, ServerIndexes,
};
pub use object::{normalize_keyword, validate_db, IndexKind, SpatioTextualObject, Term};
pub use packing::{pack_bitmap, pack_plain, unpack_plain, PackedBitmap, PackingParams};
