//! Encrypted Boolean range queries over spatio-textual data, served by two
//! non-colluding servers that re-encrypt and shuffle the index between
//! queries.
//!
//! Layers, bottom up: [`crypto`] (label PRF with key switching, two-share
//! Paillier, tags, object sealing), [`spatial`] (Hilbert codec and prefix
//! covers), [`index`] (bitmaps, packing, encrypted index build),
//! [`protocol`] (search, shuffle, update) and [`wire`] (message encoding).

pub mod crypto;
pub mod error;
pub mod index;
pub mod protocol;
pub mod spatial;
pub mod wire;

pub use error::{Error, Result};
