//! Cryptographic building blocks: the label PRF with key switching, the
//! two-share Paillier layer for ID fields, keyed tags and object sealing.

pub mod group;
pub mod paillier;
pub mod prf;
pub mod primes;
pub mod seal;
pub mod tpf;
pub mod tur;

pub use group::GroupParams;
pub use paillier::{PaillierCiphertext, PaillierKeyPair, PaillierPublicKey, PaillierSecretKey};
pub use prf::{prf_eval, Tag, TagKey};
pub use seal::{object_open, object_seal, ObjectKey};
pub use tpf::{tpf_keygen, tpf_reckeygen, tpf_reenc, tpf_rnd, ReEncKey, TpfKey, TpfLabel};
pub use tur::{
    tur_add, tur_dec, tur_keygen, tur_pdec, tur_reenc, tur_enc, tur_setup, PartialDecKey,
    PartialDecryption, ShareIndex,
};
