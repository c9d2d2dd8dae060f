//! Binary message encoding.
//!
//! Every message starts with a 13-byte header `(epoch u64, phase u8,
//! count u32)`. Integers are big-endian, variable-length fields carry a u32
//! length prefix, labels, tags and ciphertexts are fixed width.

use num_bigint::BigUint;

use crate::crypto::group::GroupParams;
use crate::crypto::prf::TAG_LEN;
use crate::crypto::{
    PaillierCiphertext, PaillierPublicKey, PartialDecKey, PartialDecryption, ReEncKey,
    ShareIndex, Tag, TagKey, TpfKey, TpfLabel, ObjectKey,
};
use crate::error::{Error, Result};
use crate::index::{Bitmap, EncryptedIndexEntry, IndexKind, PackedBitmap};
use crate::protocol::{ClientKeys, ServerKeys};

pub const HEADER_LEN: usize = 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub epoch: u64,
    pub phase: u8,
    /// Number of primary items (trapdoors, entries, tokens) in the body.
    pub count: u32,
}

#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new(header: Header) -> Self {
        let mut w = Self { buf: Vec::new() };
        w.u64(header.epoch);
        w.u8(header.phase);
        w.u32(header.count);
        w
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn len(&mut self, v: usize) {
        self.u32(u32::try_from(v).expect("length fits in u32"));
    }

    pub fn raw(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn var(&mut self, bytes: &[u8]) {
        self.len(bytes.len());
        self.raw(bytes);
    }

    pub fn label(&mut self, l: &TpfLabel) {
        self.raw(l.as_bytes());
    }

    pub fn tag(&mut self, t: &Tag) {
        self.raw(t.as_bytes());
    }

    pub fn ciphertext(&mut self, pk: &PaillierPublicKey, c: &PaillierCiphertext) {
        self.raw(&pk.ciphertext_to_bytes(c));
    }

    /// A residue mod `n^2` at ciphertext width.
    pub fn residue(&mut self, pk: &PaillierPublicKey, v: &BigUint) {
        let width = pk.ciphertext_len();
        let raw = v.to_bytes_be();
        self.raw(&vec![0u8; width - raw.len()]);
        self.raw(&raw);
    }

    pub fn packed(&mut self, pk: &PaillierPublicKey, p: &PackedBitmap) {
        self.len(p.chunks.len());
        for c in &p.chunks {
            self.ciphertext(pk, c);
        }
    }

    pub fn bitmap(&mut self, b: &Bitmap) {
        self.len(b.len());
        self.raw(&b.to_bytes());
    }

    pub fn entry(&mut self, pk: &PaillierPublicKey, e: &EncryptedIndexEntry) {
        self.label(&e.label);
        self.tag(&e.tag);
        self.packed(pk, &e.id);
    }

    pub fn entries(&mut self, pk: &PaillierPublicKey, es: &[EncryptedIndexEntry]) {
        self.len(es.len());
        for e in es {
            self.entry(pk, e);
        }
    }

    pub fn partial(&mut self, pk: &PaillierPublicKey, pd: &PartialDecryption) {
        self.ciphertext(pk, &pd.ciphertext);
        self.residue(pk, &pd.partial);
        self.u8(pd.index.as_u8());
    }

    pub fn modulus(&mut self, pk: &PaillierPublicKey) {
        self.var(&pk.n().to_bytes_be());
    }

    pub fn client_keys(&mut self, group: &GroupParams, k: &ClientKeys) {
        self.raw(&k.k_u.to_bytes(group));
        self.raw(&k.r1.to_bytes(group));
        self.raw(&k.r2.to_bytes(group));
        self.raw(k.k_t.as_bytes());
        self.raw(k.k_o.as_bytes());
        self.raw(k.k_p.as_bytes());
        self.modulus(&k.pk);
    }

    pub fn server_keys(&mut self, group: &GroupParams, k: &ServerKeys) {
        self.u8(k.side.as_u8());
        self.modulus(&k.pk);
        self.raw(&k.r.to_bytes(group));
        self.u8(k.d.index().as_u8());
        self.var(&k.d.exponent().to_bytes_be());
        self.raw(&k.rk_u_to_m.to_bytes(group));
        self.raw(k.k_p.as_bytes());
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Result<(Header, Self)> {
        let mut r = Self { buf: bytes };
        let header = Header {
            epoch: r.u64()?,
            phase: r.u8()?,
            count: r.u32()?,
        };
        Ok((header, r))
    }

    pub fn finish(self) -> Result<()> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(Error::Decode("trailing bytes"))
        }
    }

    pub fn raw(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::Decode("truncated message"));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.raw(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.raw(4)?.try_into().expect("4 bytes")))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.raw(8)?.try_into().expect("8 bytes")))
    }

    /// A length prefix, bounded by the bytes left so corrupt input cannot
    /// trigger huge allocations.
    pub fn len(&mut self) -> Result<usize> {
        let n = self.u32()? as usize;
        if n > self.buf.len() {
            return Err(Error::Decode("length prefix exceeds message"));
        }
        Ok(n)
    }

    /// A u32 size that describes something other than the bytes that
    /// follow, such as an object count.
    pub fn size(&mut self) -> Result<usize> {
        Ok(self.u32()? as usize)
    }

    pub fn var(&mut self) -> Result<&'a [u8]> {
        let n = self.len()?;
        self.raw(n)
    }

    pub fn side(&mut self) -> Result<ShareIndex> {
        ShareIndex::from_u8(self.u8()?).ok_or(Error::Decode("share index"))
    }

    pub fn kind(&mut self) -> Result<IndexKind> {
        IndexKind::from_u8(self.u8()?).ok_or(Error::Decode("index kind"))
    }

    pub fn label(&mut self, group: &GroupParams) -> Result<TpfLabel> {
        TpfLabel::from_bytes(group, self.raw(group.element_len())?)
    }

    pub fn tag(&mut self) -> Result<Tag> {
        Ok(Tag(self.raw(TAG_LEN)?.try_into().expect("tag width")))
    }

    pub fn ciphertext(&mut self, pk: &PaillierPublicKey) -> Result<PaillierCiphertext> {
        pk.ciphertext_from_bytes(self.raw(pk.ciphertext_len())?)
    }

    pub fn residue(&mut self, pk: &PaillierPublicKey) -> Result<BigUint> {
        let v = BigUint::from_bytes_be(self.raw(pk.ciphertext_len())?);
        if &v >= pk.n_squared() {
            return Err(Error::Decode("residue out of range"));
        }
        Ok(v)
    }

    pub fn packed(&mut self, pk: &PaillierPublicKey) -> Result<PackedBitmap> {
        let count = self.u32()? as usize;
        if count.saturating_mul(pk.ciphertext_len()) > self.buf.len() {
            return Err(Error::Decode("chunk count exceeds message"));
        }
        let chunks = (0..count)
            .map(|_| self.ciphertext(pk))
            .collect::<Result<_>>()?;
        Ok(PackedBitmap { chunks })
    }

    pub fn bitmap(&mut self) -> Result<Bitmap> {
        let len = self.u32()? as usize;
        Bitmap::from_bytes(len, self.raw(len.div_ceil(8))?)
    }

    pub fn entry(&mut self, group: &GroupParams, pk: &PaillierPublicKey) -> Result<EncryptedIndexEntry> {
        Ok(EncryptedIndexEntry {
            label: self.label(group)?,
            tag: self.tag()?,
            id: self.packed(pk)?,
        })
    }

    pub fn entries(
        &mut self,
        group: &GroupParams,
        pk: &PaillierPublicKey,
    ) -> Result<Vec<EncryptedIndexEntry>> {
        let count = self.u32()? as usize;
        if count > self.buf.len() {
            return Err(Error::Decode("entry count exceeds message"));
        }
        (0..count).map(|_| self.entry(group, pk)).collect()
    }

    pub fn partial(&mut self, pk: &PaillierPublicKey) -> Result<PartialDecryption> {
        Ok(PartialDecryption {
            ciphertext: self.ciphertext(pk)?,
            partial: self.residue(pk)?,
            index: self.side()?,
        })
    }

    pub fn modulus(&mut self) -> Result<PaillierPublicKey> {
        PaillierPublicKey::from_modulus(BigUint::from_bytes_be(self.var()?))
    }

    fn key32(&mut self) -> Result<[u8; 32]> {
        Ok(self.raw(32)?.try_into().expect("32 bytes"))
    }

    fn scalar(&mut self, group: &GroupParams) -> Result<BigUint> {
        let width = group.order().bits().div_ceil(8) as usize;
        Ok(BigUint::from_bytes_be(self.raw(width)?))
    }

    pub fn client_keys(&mut self, group: &GroupParams) -> Result<ClientKeys> {
        Ok(ClientKeys {
            k_u: TpfKey::from_scalar(group, self.scalar(group)?)?,
            r1: ReEncKey::from_scalar(group, self.scalar(group)?)?,
            r2: ReEncKey::from_scalar(group, self.scalar(group)?)?,
            k_t: TagKey::from_bytes(self.key32()?),
            k_o: ObjectKey::from_bytes(self.key32()?),
            k_p: TagKey::from_bytes(self.key32()?),
            pk: self.modulus()?,
        })
    }

    pub fn server_keys(&mut self, group: &GroupParams) -> Result<ServerKeys> {
        let side = self.side()?;
        let pk = self.modulus()?;
        let r = ReEncKey::from_scalar(group, self.scalar(group)?)?;
        let d_side = self.side()?;
        let d = PartialDecKey::from_parts(d_side, BigUint::from_bytes_be(self.var()?));
        Ok(ServerKeys {
            side,
            pk,
            r,
            d,
            rk_u_to_m: ReEncKey::from_scalar(group, self.scalar(group)?)?,
            k_p: TagKey::from_bytes(self.key32()?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{build_plain_indexes, encrypted_index_build, PackingParams, SpatioTextualObject};
    use crate::protocol::{setup, SystemConfig};
    use crate::spatial::{GridSpec, HilbertValue};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn keys_and_entries_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let cfg = SystemConfig::new(GridSpec::unit(3).unwrap(), 512);
        let km = setup(&cfg, &mut rng).unwrap();
        let g = &cfg.group;
        let pk = &km.client.pk;
        let params = PackingParams::for_key(pk, 16).unwrap();
        let db = [SpatioTextualObject::new(0, HilbertValue(3), ["a"]).unwrap()];
        let plain = build_plain_indexes(&db, 6).unwrap();
        let [s1, _] =
            encrypted_index_build(&plain, g, &km.owner.k_m, &km.owner.k_t, pk, &params, &mut rng)
                .unwrap();

        let header = Header { epoch: 7, phase: 2, count: 3 };
        let mut w = Writer::new(header);
        w.client_keys(g, &km.client);
        w.server_keys(g, &km.servers[1]);
        w.entries(pk, &s1.keyword.entries);
        w.bitmap(&"1011".parse().unwrap());
        let bytes = w.finish();

        let (h, mut r) = Reader::new(&bytes).unwrap();
        assert_eq!(h, header);
        assert_eq!(r.client_keys(g).unwrap(), km.client);
        assert_eq!(r.server_keys(g).unwrap(), km.servers[1]);
        assert_eq!(r.entries(g, pk).unwrap(), s1.keyword.entries);
        assert_eq!(r.bitmap().unwrap().to_string(), "1011");
        r.finish().unwrap();

        // one keyword entry: label + tag + count + one ciphertext
        let entry_len = 32 + 16 + 4 + pk.ciphertext_len();
        assert_eq!(entry_len, 32 + 16 + 4 + 128);
        for cut in [1, HEADER_LEN, bytes.len() - 1] {
            let (_, mut r) = match Reader::new(&bytes[..cut]) {
                Ok(x) => x,
                Err(_) => continue,
            };
            let res = r
                .client_keys(g)
                .and_then(|_| r.server_keys(g))
                .and_then(|_| r.entries(g, pk))
                .and_then(|_| r.bitmap());
            assert!(res.is_err());
        }
    }
}
