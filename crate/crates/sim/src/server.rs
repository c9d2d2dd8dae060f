use std::collections::BTreeMap;

use brasp_core::crypto::ShareIndex;
use brasp_core::index::{IndexKind, PackingParams, ServerIndexes};
use brasp_core::protocol::{
    apply_redistribution, holder_mask, holder_rebuild, peer_merge, server_complete,
    server_hop, server_resolve, MaskedView, RecoveryMode, ServerKeys, SideTokens, SystemConfig,
};
use brasp_core::Error;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::actor::{ActorId, Outgoing};
use crate::error::{SimError, SimResult};
use crate::message::{Codec, Message, StoredObject};

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PeerView {
    n: usize,
    prefix: MaskedView,
    keyword: MaskedView,
}

/// One of the two cloud servers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Server {
    id: ActorId,
    side: ShareIndex,
    config: SystemConfig,
    mode: RecoveryMode,
    keys: Option<ServerKeys>,
    indexes: Option<ServerIndexes>,
    objects: BTreeMap<u32, Vec<u8>>,
    epoch: u64,
    /// Update tokens for the peer's entries, waiting for its masked view.
    tokens: Option<(usize, SideTokens)>,
    view: Option<PeerView>,
    /// Object count our own entries will encode once the peer's merge
    /// comes back.
    merging: Option<usize>,
    rng: ChaCha20Rng,
}

impl Server {
    pub fn new(side: ShareIndex, config: SystemConfig, mode: RecoveryMode, rng: ChaCha20Rng) -> Self {
        Self {
            id: ActorId::server(side),
            side,
            config,
            mode,
            keys: None,
            indexes: None,
            objects: BTreeMap::new(),
            epoch: 0,
            tokens: None,
            view: None,
            merging: None,
            rng,
        }
    }

    pub fn id(&self) -> ActorId {
        self.id
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn keys(&self) -> Option<&ServerKeys> {
        self.keys.as_ref()
    }

    pub fn indexes(&self) -> Option<&ServerIndexes> {
        self.indexes.as_ref()
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn is_idle(&self) -> bool {
        self.tokens.is_none() && self.view.is_none() && self.merging.is_none()
    }

    fn peer(&self) -> ActorId {
        ActorId::server(self.side.other())
    }

    fn codec(&self) -> Codec {
        Codec {
            group: self.config.group.clone(),
            pk: self.keys.as_ref().map(|k| k.pk.clone()),
            slot_bits: self.config.slot_bits,
        }
    }

    fn keys_ok(&self) -> SimResult<&ServerKeys> {
        self.keys
            .as_ref()
            .ok_or_else(|| SimError::Order(format!("{} has no keys", self.id)))
    }

    fn send(&self, to: ActorId, msg: Message) -> SimResult<Outgoing> {
        Ok(Outgoing {
            to,
            bytes: msg.encode(self.epoch, &self.codec())?,
        })
    }

    fn hop(&mut self, shares: &mut ServerIndexes) -> SimResult<()> {
        let keys = self.keys.as_ref().ok_or_else(|| SimError::Order("hop without keys".into()))?;
        server_hop(shares, keys, &self.config.group, &mut self.rng)?;
        Ok(())
    }

    fn take_indexes(&mut self) -> SimResult<ServerIndexes> {
        self.indexes
            .take()
            .ok_or_else(|| SimError::Order(format!("{} holds no index", self.id)))
    }

    /// Opens a shuffle round. Only the first server starts rounds.
    pub fn start_shuffle(&mut self) -> SimResult<Vec<Outgoing>> {
        if self.side != ShareIndex::One {
            return Err(SimError::Order("only the first server opens a shuffle round".into()));
        }
        if !self.is_idle() {
            return Err(SimError::Order("shuffle during an update".into()));
        }
        let shares = self
            .indexes
            .clone()
            .ok_or_else(|| SimError::Order("shuffle before build".into()))?;
        Ok(vec![self.send(self.peer(), Message::ShuffleRequest(shares))?])
    }

    fn check_epoch(&self, got: u64) -> SimResult<()> {
        if got != self.epoch {
            return Err(Error::EpochMismatch {
                expected: self.epoch,
                got,
            }
            .into());
        }
        Ok(())
    }

    pub fn handle(&mut self, from: ActorId, bytes: &[u8]) -> SimResult<Vec<Outgoing>> {
        let (header, msg) = Message::decode(bytes, &self.codec())?;
        let peer = self.peer();
        let unexpected = SimError::Unexpected {
            actor: self.id,
            from,
            message: msg.name(),
        };
        if from != ActorId::DataOwner {
            self.check_epoch(header.epoch)?;
        }
        match msg {
            Message::ServerKeys(k) if from == ActorId::DataOwner && self.keys.is_none() => {
                if k.side != self.side {
                    return Err(SimError::Order("server keys for the wrong side".into()));
                }
                self.keys = Some(k);
                Ok(Vec::new())
            }
            Message::IndexBuild(s) if from == ActorId::DataOwner && self.indexes.is_none() => {
                if s.side != self.side {
                    return Err(SimError::Order("index shares for the wrong side".into()));
                }
                self.indexes = Some(s);
                Ok(Vec::new())
            }
            Message::ObjectStore(objs) if from == ActorId::DataOwner => {
                for o in objs {
                    self.objects.insert(o.id, o.sealed);
                }
                Ok(Vec::new())
            }
            Message::ShuffleRequest(mut s) if from == peer && self.side == ShareIndex::Two => {
                if s.side != ShareIndex::One {
                    return Err(SimError::Order("shuffle request carries the wrong share".into()));
                }
                self.hop(&mut s)?;
                let own = self
                    .indexes
                    .clone()
                    .ok_or_else(|| SimError::Order("shuffle before build".into()))?;
                Ok(vec![self.send(
                    peer,
                    Message::ShuffleReply {
                        processed: s,
                        peer: own,
                    },
                )?])
            }
            Message::ShuffleReply {
                mut processed,
                peer: mut theirs,
            } if from == peer && self.side == ShareIndex::One => {
                if processed.side != self.side || theirs.side != self.side.other() {
                    return Err(SimError::Order("shuffle reply sides swapped".into()));
                }
                self.take_indexes()?;
                self.hop(&mut processed)?;
                self.indexes = Some(processed);
                self.hop(&mut theirs)?;
                let out = self.send(peer, Message::ShuffleFinish(theirs))?;
                self.epoch += 1;
                Ok(vec![out])
            }
            Message::ShuffleFinish(mut s) if from == peer && self.side == ShareIndex::Two => {
                if s.side != self.side {
                    return Err(SimError::Order("shuffle finish carries the wrong share".into()));
                }
                self.take_indexes()?;
                self.hop(&mut s)?;
                self.indexes = Some(s);
                self.epoch += 1;
                Ok(vec![self.send(ActorId::Client, Message::ShuffleDone)?])
            }
            Message::Token(trapdoors) if from == ActorId::Client => {
                let keys = self.keys_ok()?;
                let indexes = self
                    .indexes
                    .as_ref()
                    .ok_or_else(|| SimError::Order("query before build".into()))?;
                let resolved = server_resolve(&trapdoors, indexes, keys, &self.config.group)?;
                Ok(vec![self.send(peer, Message::Partials(resolved))?])
            }
            Message::Partials(resolved) if from == peer => {
                if resolved.side != self.side.other() {
                    return Err(SimError::Order("partials for the wrong share".into()));
                }
                let keys = self.keys_ok()?;
                let params = PackingParams::for_key(&keys.pk, self.config.slot_bits)?;
                let resp = server_complete(&resolved, &keys.d, &keys.pk, &params, self.mode)?;
                Ok(vec![self.send(ActorId::Client, Message::SearchResult(resp))?])
            }
            Message::ObjectFetch(ids) if from == ActorId::Client => {
                let objs = ids
                    .iter()
                    .map(|id| {
                        self.objects
                            .get(id)
                            .map(|s| StoredObject {
                                id: *id,
                                sealed: s.clone(),
                            })
                            .ok_or_else(|| SimError::Order(format!("unknown object {id}")))
                    })
                    .collect::<SimResult<Vec<_>>>()?;
                Ok(vec![self.send(ActorId::Client, Message::ObjectReply(objs))?])
            }
            Message::Redistribute(items) if from == ActorId::Client => {
                let keys = self.keys.as_ref().ok_or_else(|| SimError::Order("no keys".into()))?;
                let indexes = self
                    .indexes
                    .as_mut()
                    .ok_or_else(|| SimError::Order("redistribution before build".into()))?;
                apply_redistribution(&items, indexes, keys, &self.config.group)?;
                Ok(Vec::new())
            }
            Message::UpdateTokens { n, tokens } if from == ActorId::Client && self.tokens.is_none() => {
                self.tokens = Some((n, tokens));
                self.try_merge()
            }
            Message::ObjectInsert(o) if from == ActorId::Client && self.merging.is_none() => {
                let keys = self.keys_ok()?;
                let indexes = self
                    .indexes
                    .as_ref()
                    .ok_or_else(|| SimError::Order("update before build".into()))?;
                let n = indexes.prefix.n;
                if o.id as usize != n || self.objects.contains_key(&o.id) {
                    return Err(SimError::Order(format!("insert of object {} at count {n}", o.id)));
                }
                let (k_p, pk) = (keys.k_p.clone(), keys.pk.clone());
                let prefix = holder_mask(&indexes.prefix, &k_p, &pk, &mut self.rng)?;
                let keyword = holder_mask(&indexes.keyword, &k_p, &pk, &mut self.rng)?;
                self.objects.insert(o.id, o.sealed);
                self.merging = Some(n + 1);
                Ok(vec![self.send(
                    peer,
                    Message::MaskedView {
                        n: n + 1,
                        prefix,
                        keyword,
                    },
                )?])
            }
            Message::MaskedView { n, prefix, keyword } if from == peer && self.view.is_none() => {
                self.view = Some(PeerView { n, prefix, keyword });
                self.try_merge()
            }
            Message::MergeReply { prefix, keyword } if from == peer => {
                let n = self
                    .merging
                    .take()
                    .ok_or_else(|| SimError::Order("merge reply without an open update".into()))?;
                let mut indexes = self.take_indexes()?;
                let keys = self.keys.as_ref().ok_or_else(|| SimError::Order("no keys".into()))?;
                holder_rebuild(&mut indexes.prefix, &prefix, keys, &self.config.group, n)?;
                holder_rebuild(&mut indexes.keyword, &keyword, keys, &self.config.group, n)?;
                self.indexes = Some(indexes);
                Ok(vec![self.send(ActorId::Client, Message::UpdateAck)?])
            }
            _ => Err(unexpected),
        }
    }

    /// Runs the peer's side of an update once both the client's tokens and
    /// the holder's masked view are in.
    fn try_merge(&mut self) -> SimResult<Vec<Outgoing>> {
        if self.tokens.is_none() || self.view.is_none() {
            return Ok(Vec::new());
        }
        let (n, tokens) = self.tokens.take().expect("checked");
        let view = self.view.take().expect("checked");
        if view.n != n {
            return Err(SimError::Order(format!(
                "token count {n} disagrees with view count {}",
                view.n
            )));
        }
        let keys = self.keys_ok()?;
        let pk = keys.pk.clone();
        let params = PackingParams::for_key(&pk, self.config.slot_bits)?;
        let prefix = peer_merge(
            &view.prefix,
            tokens.get(IndexKind::Prefix),
            n,
            &params,
            &pk,
            &mut self.rng,
        )?;
        let keyword = peer_merge(
            &view.keyword,
            tokens.get(IndexKind::Keyword),
            n,
            &params,
            &pk,
            &mut self.rng,
        )?;
        Ok(vec![self.send(self.peer(), Message::MergeReply { prefix, keyword })?])
    }
}
