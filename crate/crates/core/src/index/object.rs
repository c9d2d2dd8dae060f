use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::spatial::{HilbertValue, PrefixElement};

/// NFC, then lowercase, then trimmed. Empty results are rejected.
pub fn normalize_keyword(raw: &str) -> Result<String> {
    let k: String = raw.nfc().collect::<String>().to_lowercase();
    let k = k.trim();
    if k.is_empty() {
        return Err(Error::InvalidObject(format!("empty keyword {raw:?}")));
    }
    Ok(k.to_owned())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpatioTextualObject {
    pub id: u32,
    pub loc: HilbertValue,
    pub keywords: BTreeSet<String>,
}

impl SpatioTextualObject {
    pub fn new<I, S>(id: u32, loc: HilbertValue, keywords: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let keywords = keywords
            .into_iter()
            .map(|k| normalize_keyword(k.as_ref()))
            .collect::<Result<BTreeSet<_>>>()?;
        Ok(Self { id, loc, keywords })
    }

    /// `id u32 | loc u64 | count u32 | (len u32 | utf8)*`, big-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.id.to_be_bytes());
        out.extend_from_slice(&self.loc.0.to_be_bytes());
        out.extend_from_slice(&(self.keywords.len() as u32).to_be_bytes());
        for k in &self.keywords {
            out.extend_from_slice(&(k.len() as u32).to_be_bytes());
            out.extend_from_slice(k.as_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        fn take<'a>(b: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
            if b.len() < n {
                return Err(Error::Decode("truncated object"));
            }
            let (head, tail) = b.split_at(n);
            *b = tail;
            Ok(head)
        }
        let mut b = bytes;
        let id = u32::from_be_bytes(take(&mut b, 4)?.try_into().unwrap());
        let loc = u64::from_be_bytes(take(&mut b, 8)?.try_into().unwrap());
        let count = u32::from_be_bytes(take(&mut b, 4)?.try_into().unwrap());
        let mut keywords = BTreeSet::new();
        for _ in 0..count {
            let len = u32::from_be_bytes(take(&mut b, 4)?.try_into().unwrap()) as usize;
            let k = std::str::from_utf8(take(&mut b, len)?)
                .map_err(|_| Error::Decode("keyword is not utf-8"))?;
            keywords.insert(k.to_owned());
        }
        if !b.is_empty() {
            return Err(Error::Decode("trailing bytes after object"));
        }
        Ok(Self {
            id,
            loc: HilbertValue(loc),
            keywords,
        })
    }
}

/// Checks that ids are exactly `0..n` in order.
pub fn validate_db(db: &[SpatioTextualObject], bits: u8) -> Result<()> {
    for (i, o) in db.iter().enumerate() {
        if o.id as usize != i {
            return Err(Error::InvalidObject(format!(
                "object at position {i} has id {}",
                o.id
            )));
        }
        if bits < 64 && o.loc.0 >> bits != 0 {
            return Err(Error::OutOfRange {
                value: o.loc.0,
                bits,
            });
        }
    }
    Ok(())
}

/// A searchable term: a location prefix or a normalized keyword.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Prefix(PrefixElement),
    Keyword(String),
}

impl Term {
    /// Bytes fed to the label PRF and tag PRF. The leading byte separates the
    /// two term spaces.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        match self {
            Term::Prefix(p) => {
                let mut out = vec![b'h'];
                out.extend_from_slice(&p.canonical_bytes());
                out
            }
            Term::Keyword(w) => {
                let mut out = vec![b'w'];
                out.extend_from_slice(w.as_bytes());
                out
            }
        }
    }

    pub fn from_canonical_bytes(bytes: &[u8]) -> Result<Self> {
        match bytes.split_first() {
            Some((b'h', rest)) if rest.len() == 10 => {
                let value = u64::from_be_bytes(rest[2..].try_into().expect("8 bytes"));
                Ok(Term::Prefix(PrefixElement::new(value, rest[1], rest[0])?))
            }
            Some((b'w', rest)) => {
                let w = std::str::from_utf8(rest)
                    .map_err(|_| Error::InvalidObject("keyword is not utf-8".into()))?;
                if normalize_keyword(w)? != w {
                    return Err(Error::InvalidObject(format!("keyword {w:?} not normalized")));
                }
                Ok(Term::Keyword(w.to_string()))
            }
            _ => Err(Error::InvalidObject("unknown term encoding".into())),
        }
    }

    pub fn kind(&self) -> IndexKind {
        match self {
            Term::Prefix(_) => IndexKind::Prefix,
            Term::Keyword(_) => IndexKind::Keyword,
        }
    }
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Term::Prefix(p) => write!(f, "{p}"),
            Term::Keyword(w) => f.write_str(w),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IndexKind {
    Prefix,
    Keyword,
}

impl IndexKind {
    pub fn as_u8(self) -> u8 {
        match self {
            IndexKind::Prefix => 0,
            IndexKind::Keyword => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(IndexKind::Prefix),
            1 => Some(IndexKind::Keyword),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyword_normalization() {
        assert_eq!(normalize_keyword("Café").unwrap(), "café");
        // decomposed e + combining acute folds to the same string
        assert_eq!(normalize_keyword("CAFE\u{301}").unwrap(), "café");
        assert_eq!(normalize_keyword("  Pizza ").unwrap(), "pizza");
        assert!(normalize_keyword("   ").is_err());
    }

    #[test]
    fn term_bytes_round_trip() {
        let terms = [
            Term::Prefix(PrefixElement::new(0b0101, 4, 6).unwrap()),
            Term::Keyword("café".into()),
        ];
        for t in terms {
            assert_eq!(Term::from_canonical_bytes(&t.canonical_bytes()).unwrap(), t);
        }
        assert!(Term::from_canonical_bytes(b"wCafe").is_err());
        assert!(Term::from_canonical_bytes(b"x").is_err());
    }

    #[test]
    fn object_bytes_round_trip() {
        let o = SpatioTextualObject::new(7, HilbertValue(21), ["b", "a", "Ä"]).unwrap();
        let back = SpatioTextualObject::from_bytes(&o.to_bytes()).unwrap();
        assert_eq!(back, o);
        let bytes = o.to_bytes();
        assert!(SpatioTextualObject::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn term_spaces_do_not_collide() {
        let p = Term::Prefix("01****".parse().unwrap());
        let w = Term::Keyword("01****".into());
        assert_ne!(p.canonical_bytes(), w.canonical_bytes());
    }

    #[test]
    fn db_ids_must_be_dense() {
        let a = SpatioTextualObject::new(0, HilbertValue(1), ["x"]).unwrap();
        let b = SpatioTextualObject::new(2, HilbertValue(1), ["x"]).unwrap();
        assert!(validate_db(&[a.clone()], 6).is_ok());
        assert!(validate_db(&[a, b], 6).is_err());
    }
}
