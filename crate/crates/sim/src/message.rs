//! Protocol messages and their byte encoding.
//!
//! Actors exchange only encoded bytes; the transcript records exactly what
//! crossed the fabric. The header `count` field holds the number of primary
//! items in the body (trapdoors for a token, entries for index transfers,
//! update tokens for an update), which the cost accounting reads back.

use brasp_core::crypto::{GroupParams, PaillierPublicKey};
use brasp_core::index::{EncryptedIndex, IndexKind, PackingParams, ServerIndexes, Term};
use brasp_core::protocol::{
    ClientKeys, FreshEntry, MaskedView, MergeOutput, Redistribution, ResolvedTerms,
    SearchResponse, ServerKeys, SideTokens, TokenTarget, TrapdoorSet, UpdateToken,
};
use brasp_core::wire::{Header, Reader, Writer};
use brasp_core::Error;
use serde::{Deserialize, Serialize};

/// Coarse protocol phase of a message, used for transcript filtering and
/// byte accounting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Setup,
    Build,
    Shuffle,
    Search,
    Fetch,
    Redistribute,
    Update,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Setup => "setup",
            Phase::Build => "build",
            Phase::Shuffle => "shuffle",
            Phase::Search => "search",
            Phase::Fetch => "fetch",
            Phase::Redistribute => "redistribute",
            Phase::Update => "update",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A sealed object as stored at a server.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredObject {
    pub id: u32,
    #[serde(with = "crate::hexser")]
    pub sealed: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Message {
    ClientKeys(ClientKeys),
    ServerKeys(ServerKeys),
    /// Object count and term vocabulary handed to the client after a build.
    ClientState { n: usize, terms: Vec<Term> },
    IndexBuild(ServerIndexes),
    ObjectStore(Vec<StoredObject>),
    /// First server's shares, to be processed by the second.
    ShuffleRequest(ServerIndexes),
    /// The first server's shares after the second's hop, plus the second's
    /// own shares for the first server's hop.
    ShuffleReply {
        processed: ServerIndexes,
        peer: ServerIndexes,
    },
    ShuffleFinish(ServerIndexes),
    ShuffleDone,
    Token(TrapdoorSet),
    Partials(ResolvedTerms),
    SearchResult(SearchResponse),
    ObjectFetch(Vec<u32>),
    ObjectReply(Vec<StoredObject>),
    Redistribute(Vec<Redistribution>),
    /// Tokens for the entries held by the receiver's peer.
    UpdateTokens { n: usize, tokens: SideTokens },
    ObjectInsert(StoredObject),
    MaskedView {
        n: usize,
        prefix: MaskedView,
        keyword: MaskedView,
    },
    MergeReply {
        prefix: MergeOutput,
        keyword: MergeOutput,
    },
    UpdateAck,
}

/// What an actor needs to encode and decode messages.
#[derive(Clone, Debug)]
pub struct Codec {
    pub group: GroupParams,
    pub pk: Option<PaillierPublicKey>,
    pub slot_bits: u8,
}

impl Codec {
    fn pk(&self) -> Result<&PaillierPublicKey, Error> {
        self.pk.as_ref().ok_or(Error::Decode("public key not yet known"))
    }

    fn params(&self) -> Result<PackingParams, Error> {
        PackingParams::for_key(self.pk()?, self.slot_bits)
    }
}

impl Message {
    pub fn code(&self) -> u8 {
        match self {
            Message::ClientKeys(_) => 1,
            Message::ServerKeys(_) => 2,
            Message::ClientState { .. } => 3,
            Message::IndexBuild(_) => 4,
            Message::ObjectStore(_) => 5,
            Message::ShuffleRequest(_) => 10,
            Message::ShuffleReply { .. } => 11,
            Message::ShuffleFinish(_) => 12,
            Message::ShuffleDone => 13,
            Message::Token(_) => 20,
            Message::Partials(_) => 21,
            Message::SearchResult(_) => 22,
            Message::ObjectFetch(_) => 23,
            Message::ObjectReply(_) => 24,
            Message::Redistribute(_) => 30,
            Message::UpdateTokens { .. } => 40,
            Message::ObjectInsert(_) => 41,
            Message::MaskedView { .. } => 42,
            Message::MergeReply { .. } => 43,
            Message::UpdateAck => 44,
        }
    }

    pub fn name(&self) -> &'static str {
        code_name(self.code()).expect("every variant has a name")
    }

    pub fn phase(&self) -> Phase {
        code_phase(self.code()).expect("every variant has a phase")
    }

    /// Number of primary items, written to the header.
    pub fn count(&self) -> usize {
        match self {
            Message::ClientKeys(_) | Message::ServerKeys(_) => 1,
            Message::ClientState { terms, .. } => terms.len(),
            Message::IndexBuild(s) | Message::ShuffleRequest(s) | Message::ShuffleFinish(s) => {
                s.entry_count()
            }
            Message::ShuffleReply { processed, peer } => {
                processed.entry_count() + peer.entry_count()
            }
            Message::ObjectStore(o) | Message::ObjectReply(o) => o.len(),
            Message::ShuffleDone | Message::UpdateAck => 0,
            Message::Token(t) => t.len(),
            Message::Partials(r) => r.terms.len(),
            Message::SearchResult(r) => r.bitmaps.len(),
            Message::ObjectFetch(ids) => ids.len(),
            Message::Redistribute(items) => items.len(),
            Message::UpdateTokens { tokens, .. } => tokens.len(),
            Message::ObjectInsert(_) => 1,
            Message::MaskedView {
                prefix, keyword, ..
            } => prefix.fields.len() + keyword.fields.len(),
            Message::MergeReply { prefix, keyword } => {
                prefix.view.fields.len()
                    + prefix.fresh.len()
                    + keyword.view.fields.len()
                    + keyword.fresh.len()
            }
        }
    }

    pub fn encode(&self, epoch: u64, codec: &Codec) -> Result<Vec<u8>, Error> {
        let count = u32::try_from(self.count()).map_err(|_| Error::Decode("count overflow"))?;
        let mut w = Writer::new(Header {
            epoch,
            phase: self.code(),
            count,
        });
        let g = &codec.group;
        match self {
            Message::ClientKeys(k) => w.client_keys(g, k),
            Message::ServerKeys(k) => w.server_keys(g, k),
            Message::ClientState { n, terms } => {
                w.len(*n);
                w.len(terms.len());
                for t in terms {
                    w.var(&t.canonical_bytes());
                }
            }
            Message::IndexBuild(s) | Message::ShuffleRequest(s) | Message::ShuffleFinish(s) => {
                write_indexes(&mut w, codec.pk()?, s)
            }
            Message::ShuffleReply { processed, peer } => {
                write_indexes(&mut w, codec.pk()?, processed);
                write_indexes(&mut w, codec.pk()?, peer);
            }
            Message::ObjectStore(objs) | Message::ObjectReply(objs) => {
                w.len(objs.len());
                for o in objs {
                    w.u32(o.id);
                    w.var(&o.sealed);
                }
            }
            Message::ShuffleDone | Message::UpdateAck => {}
            Message::Token(t) => {
                for list in [&t.prefix, &t.keyword] {
                    w.len(list.len());
                    for l in list {
                        w.label(l);
                    }
                }
            }
            Message::Partials(r) => {
                let pk = codec.pk()?;
                w.u8(r.side.as_u8());
                w.len(r.n);
                w.len(r.prefix_count);
                w.len(r.terms.len());
                for t in &r.terms {
                    match t {
                        None => w.u8(0),
                        Some(pds) => {
                            w.u8(1);
                            w.len(pds.len());
                            for pd in pds {
                                w.partial(pk, pd);
                            }
                        }
                    }
                }
            }
            Message::SearchResult(r) => {
                let width = result_width(codec.params()?, r.n);
                w.u8(r.side.as_u8());
                w.len(r.n);
                w.len(r.prefix_count);
                w.len(r.bitmaps.len());
                for b in &r.bitmaps {
                    match b {
                        None => w.u8(0),
                        Some(b) => {
                            w.u8(1);
                            let mut padded = b.clone();
                            padded.resize(width);
                            w.bitmap(&padded);
                        }
                    }
                }
                w.len(r.candidates.len());
                for c in &r.candidates {
                    w.u32(*c);
                }
            }
            Message::ObjectFetch(ids) => {
                w.len(ids.len());
                for id in ids {
                    w.u32(*id);
                }
            }
            Message::Redistribute(items) => {
                let pk = codec.pk()?;
                w.len(items.len());
                for it in items {
                    w.u8(it.kind.as_u8());
                    w.label(&it.trapdoor);
                    w.packed(pk, &it.id);
                }
            }
            Message::UpdateTokens { n, tokens } => {
                let pk = codec.pk()?;
                w.len(*n);
                for list in [&tokens.prefix, &tokens.keyword] {
                    w.len(list.len());
                    for t in list {
                        match &t.target {
                            TokenTarget::Address(a) => {
                                w.u8(0);
                                w.tag(a);
                            }
                            TokenTarget::Fresh { label, tag } => {
                                w.u8(1);
                                w.label(label);
                                w.tag(tag);
                            }
                        }
                        w.packed(pk, &t.delta);
                    }
                }
            }
            Message::ObjectInsert(o) => {
                w.u32(o.id);
                w.var(&o.sealed);
            }
            Message::MaskedView {
                n,
                prefix,
                keyword,
            } => {
                let pk = codec.pk()?;
                w.len(*n);
                write_view(&mut w, pk, prefix);
                write_view(&mut w, pk, keyword);
            }
            Message::MergeReply { prefix, keyword } => {
                let pk = codec.pk()?;
                for m in [prefix, keyword] {
                    write_view(&mut w, pk, &m.view);
                    w.len(m.fresh.len());
                    for f in &m.fresh {
                        w.label(&f.label);
                        w.tag(&f.tag);
                        w.packed(pk, &f.id);
                    }
                    w.len(m.touches.len());
                    for t in &m.touches {
                        w.u32(*t);
                    }
                }
            }
        }
        Ok(w.finish())
    }

    pub fn decode(bytes: &[u8], codec: &Codec) -> Result<(Header, Message), Error> {
        let (header, mut r) = Reader::new(bytes)?;
        let g = &codec.group;
        let msg = match header.phase {
            1 => Message::ClientKeys(r.client_keys(g)?),
            2 => Message::ServerKeys(r.server_keys(g)?),
            3 => {
                let n = r.size()?;
                let count = r.len()?;
                let terms = (0..count)
                    .map(|_| Term::from_canonical_bytes(r.var()?))
                    .collect::<Result<_, _>>()?;
                Message::ClientState { n, terms }
            }
            4 => Message::IndexBuild(read_indexes(&mut r, g, codec.pk()?)?),
            5 => Message::ObjectStore(read_objects(&mut r)?),
            10 => Message::ShuffleRequest(read_indexes(&mut r, g, codec.pk()?)?),
            11 => Message::ShuffleReply {
                processed: read_indexes(&mut r, g, codec.pk()?)?,
                peer: read_indexes(&mut r, g, codec.pk()?)?,
            },
            12 => Message::ShuffleFinish(read_indexes(&mut r, g, codec.pk()?)?),
            13 => Message::ShuffleDone,
            20 => {
                let mut lists = [Vec::new(), Vec::new()];
                for list in &mut lists {
                    let count = r.len()?;
                    for _ in 0..count {
                        list.push(r.label(g)?);
                    }
                }
                let [prefix, keyword] = lists;
                Message::Token(TrapdoorSet { prefix, keyword })
            }
            21 => {
                let pk = codec.pk()?;
                let side = r.side()?;
                let n = r.size()?;
                let prefix_count = r.size()?;
                let count = r.len()?;
                let mut terms = Vec::with_capacity(count);
                for _ in 0..count {
                    terms.push(match r.u8()? {
                        0 => None,
                        1 => {
                            let k = r.len()?;
                            Some((0..k).map(|_| r.partial(pk)).collect::<Result<_, _>>()?)
                        }
                        _ => return Err(Error::Decode("presence flag")),
                    });
                }
                Message::Partials(ResolvedTerms {
                    side,
                    n,
                    prefix_count,
                    terms,
                })
            }
            22 => {
                let params = codec.params()?;
                let side = r.side()?;
                let n = r.size()?;
                let prefix_count = r.size()?;
                let width = result_width(params, n);
                let count = r.len()?;
                let mut bitmaps = Vec::with_capacity(count);
                for _ in 0..count {
                    bitmaps.push(match r.u8()? {
                        0 => None,
                        1 => {
                            let mut b = r.bitmap()?;
                            if b.len() != width || b.iter_ones().any(|i| i >= n) {
                                return Err(Error::Decode("result bitmap width"));
                            }
                            b.resize(n);
                            Some(b)
                        }
                        _ => return Err(Error::Decode("presence flag")),
                    });
                }
                let c = r.len()?;
                let candidates = (0..c).map(|_| r.u32()).collect::<Result<_, _>>()?;
                Message::SearchResult(SearchResponse {
                    side,
                    n,
                    prefix_count,
                    bitmaps,
                    candidates,
                })
            }
            23 => {
                let c = r.len()?;
                Message::ObjectFetch((0..c).map(|_| r.u32()).collect::<Result<_, _>>()?)
            }
            24 => Message::ObjectReply(read_objects(&mut r)?),
            30 => {
                let pk = codec.pk()?;
                let c = r.len()?;
                let mut items = Vec::with_capacity(c);
                for _ in 0..c {
                    items.push(Redistribution {
                        kind: r.kind()?,
                        trapdoor: r.label(g)?,
                        id: r.packed(pk)?,
                    });
                }
                Message::Redistribute(items)
            }
            40 => {
                let pk = codec.pk()?;
                let n = r.size()?;
                let mut lists = [Vec::new(), Vec::new()];
                for list in &mut lists {
                    let c = r.len()?;
                    for _ in 0..c {
                        let target = match r.u8()? {
                            0 => TokenTarget::Address(r.tag()?),
                            1 => TokenTarget::Fresh {
                                label: r.label(g)?,
                                tag: r.tag()?,
                            },
                            _ => return Err(Error::Decode("token target")),
                        };
                        list.push(UpdateToken {
                            target,
                            delta: r.packed(pk)?,
                        });
                    }
                }
                let [prefix, keyword] = lists;
                Message::UpdateTokens {
                    n,
                    tokens: SideTokens { prefix, keyword },
                }
            }
            41 => Message::ObjectInsert(StoredObject {
                id: r.u32()?,
                sealed: r.var()?.to_vec(),
            }),
            42 => {
                let pk = codec.pk()?;
                Message::MaskedView {
                    n: r.size()?,
                    prefix: read_view(&mut r, pk)?,
                    keyword: read_view(&mut r, pk)?,
                }
            }
            43 => {
                let pk = codec.pk()?;
                let mut outs = Vec::with_capacity(2);
                for _ in 0..2 {
                    let view = read_view(&mut r, pk)?;
                    let c = r.len()?;
                    let mut fresh = Vec::with_capacity(c);
                    for _ in 0..c {
                        fresh.push(FreshEntry {
                            label: r.label(g)?,
                            tag: r.tag()?,
                            id: r.packed(pk)?,
                        });
                    }
                    let c = r.len()?;
                    let touches = (0..c).map(|_| r.u32()).collect::<Result<_, _>>()?;
                    outs.push(MergeOutput {
                        view,
                        fresh,
                        touches,
                    });
                }
                let keyword = outs.pop().expect("two outputs");
                let prefix = outs.pop().expect("two outputs");
                Message::MergeReply { prefix, keyword }
            }
            44 => Message::UpdateAck,
            _ => return Err(Error::Decode("unknown message code")),
        };
        r.finish()?;
        if msg.count() as u64 != header.count as u64 {
            return Err(Error::Decode("header count disagrees with body"));
        }
        Ok((header, msg))
    }
}

pub fn code_name(code: u8) -> Option<&'static str> {
    Some(match code {
        1 => "client_keys",
        2 => "server_keys",
        3 => "client_state",
        4 => "index_build",
        5 => "object_store",
        10 => "shuffle_request",
        11 => "shuffle_reply",
        12 => "shuffle_finish",
        13 => "shuffle_done",
        20 => "token",
        21 => "partials",
        22 => "search_result",
        23 => "object_fetch",
        24 => "object_reply",
        30 => "redistribute",
        40 => "update_tokens",
        41 => "object_insert",
        42 => "masked_view",
        43 => "merge_reply",
        44 => "update_ack",
        _ => return None,
    })
}

pub fn code_phase(code: u8) -> Option<Phase> {
    Some(match code {
        1..=2 => Phase::Setup,
        3..=5 => Phase::Build,
        10..=13 => Phase::Shuffle,
        20..=22 => Phase::Search,
        23..=24 => Phase::Fetch,
        30 => Phase::Redistribute,
        40..=44 => Phase::Update,
        _ => return None,
    })
}

/// Wire width of a result bitmap. Every chunk travels at full capacity,
/// rounded up to whole bytes, so the message grows by the same amount per
/// chunk and depends on n only through the chunk count.
fn result_width(params: PackingParams, n: usize) -> usize {
    params.chunks_for(n) * params.per_chunk.next_multiple_of(8)
}

fn write_indexes(w: &mut Writer, pk: &PaillierPublicKey, s: &ServerIndexes) {
    w.u8(s.side.as_u8());
    for idx in [&s.prefix, &s.keyword] {
        w.u8(idx.kind.as_u8());
        w.len(idx.n);
        w.entries(pk, &idx.entries);
    }
}

fn read_indexes(
    r: &mut Reader<'_>,
    g: &GroupParams,
    pk: &PaillierPublicKey,
) -> Result<ServerIndexes, Error> {
    let side = r.side()?;
    let mut read = |want: IndexKind| -> Result<EncryptedIndex, Error> {
        if r.kind()? != want {
            return Err(Error::Decode("index kind out of order"));
        }
        Ok(EncryptedIndex {
            kind: want,
            side,
            n: r.size()?,
            entries: r.entries(g, pk)?,
        })
    };
    let prefix = read(IndexKind::Prefix)?;
    let keyword = read(IndexKind::Keyword)?;
    Ok(ServerIndexes {
        side,
        prefix,
        keyword,
    })
}

fn read_objects(r: &mut Reader<'_>) -> Result<Vec<StoredObject>, Error> {
    let c = r.len()?;
    (0..c)
        .map(|_| {
            Ok(StoredObject {
                id: r.u32()?,
                sealed: r.var()?.to_vec(),
            })
        })
        .collect()
}

fn write_view(w: &mut Writer, pk: &PaillierPublicKey, v: &MaskedView) {
    w.len(v.fields.len());
    for (a, f) in &v.fields {
        w.tag(a);
        w.packed(pk, f);
    }
}

fn read_view(r: &mut Reader<'_>, pk: &PaillierPublicKey) -> Result<MaskedView, Error> {
    let c = r.len()?;
    let mut fields = Vec::with_capacity(c);
    for _ in 0..c {
        fields.push((r.tag()?, r.packed(pk)?));
    }
    Ok(MaskedView { fields })
}
