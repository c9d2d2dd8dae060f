//! Slot packing of bitmaps into Paillier plaintexts. Object `i` of a chunk
//! occupies bits `[i*s, (i+1)*s)`, so adding two packings adds slotwise.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::crypto::{tur_enc, tur_reenc, PaillierCiphertext, PaillierKeyPair, PaillierPublicKey};
use crate::error::{Error, Result};
use crate::index::bitmap::Bitmap;

pub const DEFAULT_SLOT_BITS: u8 = 16;
/// Headroom kept free at the top of each plaintext.
const TOP_MARGIN_BITS: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingParams {
    pub slot_bits: u8,
    pub per_chunk: usize,
}

impl PackingParams {
    pub fn new(modulus_bits: u64, slot_bits: u8) -> Result<Self> {
        if !(2..=32).contains(&slot_bits) {
            return Err(Error::InvalidPacking("slot width must be in 2..=32"));
        }
        let usable = modulus_bits.saturating_sub(TOP_MARGIN_BITS);
        let per_chunk = (usable / slot_bits as u64) as usize;
        if per_chunk == 0 {
            return Err(Error::InvalidPacking("modulus too small for one slot"));
        }
        Ok(Self {
            slot_bits,
            per_chunk,
        })
    }

    pub fn for_key(pk: &PaillierPublicKey, slot_bits: u8) -> Result<Self> {
        Self::new(pk.modulus_bits(), slot_bits)
    }

    pub fn chunks_for(&self, n: usize) -> usize {
        n.div_ceil(self.per_chunk)
    }
}

/// Plaintext integers for `b`, one per chunk.
pub fn pack_plain(b: &Bitmap, params: &PackingParams) -> Vec<BigUint> {
    let s = params.slot_bits as u64;
    (0..params.chunks_for(b.len()))
        .map(|c| {
            let mut v = BigUint::zero();
            for j in 0..params.per_chunk {
                let i = c * params.per_chunk + j;
                if b.get(i) {
                    v.set_bit(j as u64 * s, true);
                }
            }
            v
        })
        .collect()
}

/// Reduces every slot mod 2. A chunk with bits above its slot area means a
/// slot carried over.
pub fn unpack_plain(values: &[BigUint], len: usize, params: &PackingParams) -> Result<Bitmap> {
    if values.len() != params.chunks_for(len) {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: params.chunks_for(len),
        });
    }
    let s = params.slot_bits as u64;
    let mut b = Bitmap::zeros(len);
    for (c, v) in values.iter().enumerate() {
        if v.bits() > params.per_chunk as u64 * s {
            return Err(Error::SlotOverflow { chunk: c });
        }
        for j in 0..params.per_chunk {
            let i = c * params.per_chunk + j;
            if i >= len {
                if v.bit(j as u64 * s) {
                    return Err(Error::InvalidPacking("bit set beyond bitmap length"));
                }
                continue;
            }
            if v.bit(j as u64 * s) {
                b.set(i, true);
            }
        }
    }
    Ok(b)
}

/// An encrypted packed bitmap: the ID field of an index entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedBitmap {
    pub chunks: Vec<PaillierCiphertext>,
}

pub fn pack_bitmap<R: RngCore + CryptoRng>(
    b: &Bitmap,
    params: &PackingParams,
    pk: &PaillierPublicKey,
    rng: &mut R,
) -> Result<PackedBitmap> {
    let chunks = pack_plain(b, params)
        .iter()
        .map(|m| tur_enc(m, pk, rng))
        .collect::<Result<_>>()?;
    Ok(PackedBitmap { chunks })
}

impl PackedBitmap {
    pub fn rerandomize<R: RngCore + CryptoRng>(
        &self,
        pk: &PaillierPublicKey,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(Self {
            chunks: self
                .chunks
                .iter()
                .map(|c| tur_reenc(c, pk, rng))
                .collect::<Result<_>>()?,
        })
    }

    /// Full-key decryption, used by the data owner and in tests.
    pub fn decrypt(&self, kp: &PaillierKeyPair, len: usize, params: &PackingParams) -> Result<Bitmap> {
        let values = self
            .chunks
            .iter()
            .map(|c| kp.decrypt(c))
            .collect::<Result<Vec<_>>>()?;
        unpack_plain(&values, len, params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::tur_add;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn chunk_capacity_at_common_sizes() {
        assert_eq!(PackingParams::new(512, 16).unwrap().per_chunk, 28);
        assert_eq!(PackingParams::new(1024, 16).unwrap().per_chunk, 60);
        assert_eq!(PackingParams::new(2048, 16).unwrap().per_chunk, 124);
        assert!(PackingParams::new(512, 1).is_err());
        assert!(PackingParams::new(512, 33).is_err());
    }

    #[test]
    fn four_bit_slots_of_10100() {
        let params = PackingParams::new(512, 4).unwrap();
        let b: Bitmap = "10100".parse().unwrap();
        let plain = pack_plain(&b, &params);
        assert_eq!(plain, vec![BigUint::from(0b1_0000_0001_0000_0000u32)]);
        assert_eq!(unpack_plain(&plain, 5, &params).unwrap(), b);
    }

    #[test]
    fn zero_bitmap_packs_to_zero_chunks() {
        let params = PackingParams::new(512, 16).unwrap();
        let plain = pack_plain(&Bitmap::zeros(60), &params);
        assert_eq!(plain.len(), 3);
        assert!(plain.iter().all(Zero::is_zero));
    }

    #[test]
    fn slot_arithmetic_is_mod_two_and_overflow_is_caught() {
        let params = PackingParams::new(128, 2).unwrap();
        // slot value 2 reduces to bit 0, slot value 3 to bit 1
        let v = BigUint::from(0b11_10u32);
        let b = unpack_plain(&[v], 2, &params).unwrap();
        assert_eq!(b.to_string(), "10");
        let too_big = BigUint::from(1u32) << (params.per_chunk as u32 * 2);
        assert!(matches!(
            unpack_plain(&[too_big], params.per_chunk, &params),
            Err(Error::SlotOverflow { chunk: 0 })
        ));
    }

    #[test]
    fn encrypted_disjoint_sum_decodes_to_or() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let kp = PaillierKeyPair::generate(512, &mut rng).unwrap();
        let params = PackingParams::for_key(&kp.public, 16).unwrap();
        let a = Bitmap::from_indices(40, [0, 5, 30]);
        let b = Bitmap::from_indices(40, [1, 29, 39]);
        let pa = pack_bitmap(&a, &params, &kp.public, &mut rng).unwrap();
        let pb = pack_bitmap(&b, &params, &kp.public, &mut rng).unwrap();
        let sum = PackedBitmap {
            chunks: pa
                .chunks
                .iter()
                .zip(&pb.chunks)
                .map(|(x, y)| tur_add(&kp.public, x, y))
                .collect(),
        };
        assert_eq!(sum.decrypt(&kp, 40, &params).unwrap(), a.or(&b).unwrap());
        let again = pa.rerandomize(&kp.public, &mut rng).unwrap();
        assert_ne!(again, pa);
        assert_eq!(again.decrypt(&kp, 40, &params).unwrap(), a);
    }
}
