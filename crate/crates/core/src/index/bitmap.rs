use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-length bit vector; bit `i` marks object `i`.
///
/// The string form prints object 0 as the rightmost character.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bitmap {
    len: usize,
    words: Vec<u64>,
}

impl Bitmap {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Self::zeros(len);
        for i in 0..len {
            b.set(i, true);
        }
        b
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Self::zeros(len);
        for i in indices {
            b.set(i, true);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.len && (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit {i} outside bitmap of length {}", self.len);
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// Extends with zero bits.
    pub fn resize(&mut self, len: usize) {
        if len < self.len {
            for i in len..self.len {
                self.set(i, false);
            }
        }
        self.len = len;
        self.words.resize(len.div_ceil(64), 0);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Result<Self> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(Self {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn or(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn and(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.len == other.len && self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Little-endian packed bytes, `ceil(len / 8)` long.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.len.div_ceil(8));
        out
    }

    pub fn from_bytes(len: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Decode("bitmap byte length"));
        }
        let mut b = Self::zeros(len);
        for (i, byte) in bytes.iter().enumerate() {
            for bit in 0..8 {
                if byte >> bit & 1 == 1 {
                    let idx = i * 8 + bit;
                    if idx >= len {
                        return Err(Error::Decode("bitmap padding bits set"));
                    }
                    b.set(idx, true);
                }
            }
        }
        Ok(b)
    }
}

impl fmt::Display for Bitmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.len).rev() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitmap({self})")
    }
}

impl FromStr for Bitmap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let len = s.len();
        let mut b = Self::zeros(len);
        for (pos, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => b.set(len - 1 - pos, true),
                _ => return Err(Error::Decode("bitmap string must be 0/1")),
            }
        }
        Ok(b)
    }
}

/// Two disjoint bitmaps whose union is the full bitmap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareBitmap {
    pub one: Bitmap,
    pub two: Bitmap,
}

/// Sends each set bit to a uniformly chosen share.
pub fn split_shares<R: RngCore + ?Sized>(b: &Bitmap, rng: &mut R) -> ShareBitmap {
    let mut one = Bitmap::zeros(b.len());
    let mut two = Bitmap::zeros(b.len());
    for i in b.iter_ones() {
        if rng.gen::<bool>() {
            one.set(i, true);
        } else {
            two.set(i, true);
        }
    }
    ShareBitmap { one, two }
}

/// Slotwise sum mod 2.
pub fn combine_shares(b1: &Bitmap, b2: &Bitmap) -> Result<Bitmap> {
    b1.xor(b2)
}
