use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `width`-bit pattern whose first `len` bits are fixed and the rest are
/// wildcards, e.g. `0101**`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PrefixElement {
    width: u8,
    len: u8,
    /// The fixed bits, right-aligned.
    value: u64,
}

impl PrefixElement {
    pub fn new(value: u64, len: u8, width: u8) -> Result<Self> {
        if width == 0 || width > 64 || len > width {
            return Err(Error::MalformedPrefix(format!("len {len} width {width}")));
        }
        if len < 64 && value >> len != 0 {
            return Err(Error::MalformedPrefix(format!(
                "value {value} wider than {len} bits"
            )));
        }
        Ok(Self { width, len, value })
    }

    /// Prefix of length `len` of the `width`-bit value `x`.
    pub fn of_value(x: u64, len: u8, width: u8) -> Self {
        debug_assert!(len <= width && width <= 64);
        let shift = (width - len) as u32;
        let value = if shift >= 64 { 0 } else { x >> shift };
        Self { width, len, value }
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn len(&self) -> u8 {
        self.len
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn is_all_wildcard(&self) -> bool {
        self.len == 0
    }

    /// Inclusive range of values matched.
    pub fn span(&self) -> (u64, u64) {
        let free = (self.width - self.len) as u32;
        let lo = if free >= 64 { 0 } else { self.value << free };
        let hi = if free >= 64 {
            u64::MAX
        } else {
            lo | ((1u64 << free) - 1)
        };
        (lo, hi)
    }

    pub fn covers(&self, x: u64) -> bool {
        let (lo, hi) = self.span();
        (lo..=hi).contains(&x)
    }

    /// The two prefixes one bit longer, or `None` at full length.
    pub fn children(&self) -> Option<[Self; 2]> {
        (self.len < self.width).then(|| {
            [0, 1].map(|b| Self {
                width: self.width,
                len: self.len + 1,
                value: (self.value << 1) | b,
            })
        })
    }

    /// Canonical term bytes `(len, value)` used for labels and tags.
    pub fn canonical_bytes(&self) -> [u8; 10] {
        let mut out = [0u8; 10];
        out[0] = self.width;
        out[1] = self.len;
        out[2..].copy_from_slice(&self.value.to_be_bytes());
        out
    }
}

impl fmt::Display for PrefixElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.width {
            if i < self.len {
                let bit = (self.value >> (self.len - 1 - i)) & 1;
                f.write_str(if bit == 1 { "1" } else { "0" })?;
            } else {
                f.write_str("*")?;
            }
        }
        Ok(())
    }
}

impl FromStr for PrefixElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let width = s.len();
        if width == 0 || width > 64 {
            return Err(Error::MalformedPrefix(s.to_owned()));
        }
        let fixed = s.trim_end_matches('*');
        let mut value = 0u64;
        for ch in fixed.chars() {
            value = (value << 1)
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::MalformedPrefix(s.to_owned())),
                };
        }
        Self::new(value, fixed.len() as u8, width as u8)
    }
}

/// All prefixes of `x`, from the full value down to the all-wildcard element.
pub fn prefix_family(x: u64, width: u8) -> Result<Vec<PrefixElement>> {
    if width == 0 || width > 64 || (width < 64 && x >> width != 0) {
        return Err(Error::OutOfRange { value: x, bits: width });
    }
    Ok((0..=width)
        .rev()
        .map(|len| PrefixElement::of_value(x, len, width))
        .collect())
}

/// Prefixes of lengths `1..=width` in (length, value) order; the all-wildcard
/// element is excluded. Size `2^(width+1) - 2`.
pub fn prefix_universe(width: u8) -> impl Iterator<Item = PrefixElement> {
    (1..=width).flat_map(move |len| {
        (0..(1u64 << len)).map(move |value| PrefixElement { width, len, value })
    })
}

pub fn prefix_universe_size(width: u8) -> u64 {
    (1u64 << (width + 1)) - 2
}
