use std::collections::BTreeSet;

use brasp_core::crypto::object_open;
use brasp_core::index::{PackingParams, SpatioTextualObject};
use brasp_core::protocol::{
    client_recover, combined_bitmaps, index_redistribution, token_generation, update_token_generation,
    BooleanRangeQuery, ClientKeys, QueryPlan, RecoveryMode, Redistribution, ResultSet,
    SearchResponse, ShuffleStateTable, SystemConfig, UpdateTokenSet,
};
use brasp_core::crypto::ShareIndex;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::actor::{ActorId, Outgoing};
use crate::error::{SimError, SimResult};
use crate::message::{Codec, Message, StoredObject};

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PendingQuery {
    plan: QueryPlan,
    responses: [Option<SearchResponse>; 2],
    ids: Option<BTreeSet<u32>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Client {
    config: SystemConfig,
    mode: RecoveryMode,
    keys: Option<ClientKeys>,
    states: Option<ShuffleStateTable>,
    n: usize,
    pending: Option<PendingQuery>,
    redistribution: Option<[Vec<Redistribution>; 2]>,
    result: Option<ResultSet>,
    acks_due: usize,
    last_update: Option<UpdateTokenSet>,
    rng: ChaCha20Rng,
}

impl Client {
    pub fn new(config: SystemConfig, mode: RecoveryMode, rng: ChaCha20Rng) -> Self {
        Self {
            config,
            mode,
            keys: None,
            states: None,
            n: 0,
            pending: None,
            redistribution: None,
            result: None,
            acks_due: 0,
            last_update: None,
            rng,
        }
    }

    pub fn keys(&self) -> Option<&ClientKeys> {
        self.keys.as_ref()
    }

    pub fn states(&self) -> Option<&ShuffleStateTable> {
        self.states.as_ref()
    }

    pub fn epoch(&self) -> u64 {
        self.states.as_ref().map_or(0, |s| s.epoch)
    }

    pub fn object_count(&self) -> usize {
        self.n
    }

    pub fn query_in_flight(&self) -> bool {
        self.pending.is_some()
    }

    pub fn redistribution_due(&self) -> bool {
        self.redistribution.is_some()
    }

    pub fn update_in_flight(&self) -> bool {
        self.acks_due > 0
    }

    pub fn take_result(&mut self) -> Option<ResultSet> {
        self.result.take()
    }

    /// Token set of the most recent insertion.
    pub fn last_update(&self) -> Option<&UpdateTokenSet> {
        self.last_update.as_ref()
    }

    fn codec(&self) -> Codec {
        Codec {
            group: self.config.group.clone(),
            pk: self.keys.as_ref().map(|k| k.pk.clone()),
            slot_bits: self.config.slot_bits,
        }
    }

    fn ready(&self) -> SimResult<(&ClientKeys, &ShuffleStateTable)> {
        match (&self.keys, &self.states) {
            (Some(k), Some(s)) => Ok((k, s)),
            _ => Err(SimError::Order("client has no keys or index state yet".into())),
        }
    }

    fn params(&self) -> SimResult<PackingParams> {
        let (keys, _) = self.ready()?;
        Ok(PackingParams::for_key(&keys.pk, self.config.slot_bits)?)
    }

    pub fn start_query(&mut self, q: &BooleanRangeQuery) -> SimResult<Vec<Outgoing>> {
        if self.pending.is_some() || self.redistribution.is_some() {
            return Err(SimError::Order(
                "a query must be followed by its redistribution before the next one".into(),
            ));
        }
        let (keys, states) = self.ready()?;
        let plan = token_generation(q, keys, states, &self.config.group);
        let msg = Message::Token(plan.trapdoors.clone());
        let bytes = msg.encode(states.epoch, &self.codec())?;
        self.result = None;
        self.pending = Some(PendingQuery {
            plan,
            responses: [None, None],
            ids: None,
        });
        Ok(vec![
            Outgoing {
                to: ActorId::Cs1,
                bytes: bytes.clone(),
            },
            Outgoing {
                to: ActorId::Cs2,
                bytes,
            },
        ])
    }

    pub fn start_redistribution(&mut self) -> SimResult<Vec<Outgoing>> {
        let Some([one, two]) = self.redistribution.take() else {
            return Err(SimError::Order("no query awaiting redistribution".into()));
        };
        let codec = self.codec();
        let epoch = self.epoch();
        Ok(vec![
            Outgoing {
                to: ActorId::Cs1,
                bytes: Message::Redistribute(one).encode(epoch, &codec)?,
            },
            Outgoing {
                to: ActorId::Cs2,
                bytes: Message::Redistribute(two).encode(epoch, &codec)?,
            },
        ])
    }

    /// Tokens for entries held by a server go to the other server; the
    /// sealed object goes to both.
    pub fn start_update(&mut self, obj: &SpatioTextualObject) -> SimResult<Vec<Outgoing>> {
        if self.pending.is_some() || self.redistribution.is_some() || self.acks_due > 0 {
            return Err(SimError::Order("update while another operation is open".into()));
        }
        let params = self.params()?;
        let codec = self.codec();
        let bits = self.config.bits();
        let (Some(keys), Some(states)) = (&self.keys, &mut self.states) else {
            return Err(SimError::Order("client has no keys or index state yet".into()));
        };
        let epoch = states.epoch;
        let mut trial = states.clone();
        let (set, sealed) = update_token_generation(
            obj,
            self.n,
            keys,
            &mut trial,
            &params,
            &self.config.group,
            bits,
            &mut self.rng,
        )?;
        *states = trial;
        let [side1, side2] = set.sides.clone();
        let insert = Message::ObjectInsert(StoredObject { id: obj.id, sealed }).encode(epoch, &codec)?;
        let out = vec![
            Outgoing {
                to: ActorId::Cs2,
                bytes: Message::UpdateTokens {
                    n: set.n,
                    tokens: side1,
                }
                .encode(epoch, &codec)?,
            },
            Outgoing {
                to: ActorId::Cs1,
                bytes: Message::UpdateTokens {
                    n: set.n,
                    tokens: side2,
                }
                .encode(epoch, &codec)?,
            },
            Outgoing {
                to: ActorId::Cs1,
                bytes: insert.clone(),
            },
            Outgoing {
                to: ActorId::Cs2,
                bytes: insert,
            },
        ];
        self.n = set.n;
        self.last_update = Some(set);
        self.acks_due = 2;
        Ok(out)
    }

    pub fn handle(&mut self, from: ActorId, bytes: &[u8]) -> SimResult<Vec<Outgoing>> {
        let (header, msg) = Message::decode(bytes, &self.codec())?;
        let unexpected = |m: &Message| SimError::Unexpected {
            actor: ActorId::Client,
            from,
            message: m.name(),
        };
        match msg {
            Message::ClientKeys(k) if from == ActorId::DataOwner && self.keys.is_none() => {
                self.keys = Some(k);
                Ok(Vec::new())
            }
            Message::ClientState { n, terms } if from == ActorId::DataOwner => {
                self.n = n;
                self.states = Some(ShuffleStateTable::new(terms));
                Ok(Vec::new())
            }
            Message::ShuffleDone if from == ActorId::Cs2 => {
                let states = self
                    .states
                    .as_mut()
                    .ok_or_else(|| SimError::Order("shuffle before build".into()))?;
                states.advance();
                if header.epoch != states.epoch {
                    return Err(brasp_core::Error::EpochMismatch {
                        expected: states.epoch,
                        got: header.epoch,
                    }
                    .into());
                }
                Ok(Vec::new())
            }
            Message::SearchResult(resp) if from.is_server() => self.on_search_result(from, resp),
            Message::ObjectReply(objs) if from == ActorId::Cs1 => self.on_objects(objs),
            Message::UpdateAck if from.is_server() && self.acks_due > 0 => {
                self.acks_due -= 1;
                Ok(Vec::new())
            }
            other => Err(unexpected(&other)),
        }
    }

    fn on_search_result(&mut self, from: ActorId, resp: SearchResponse) -> SimResult<Vec<Outgoing>> {
        let mode = self.mode;
        let params = self.params()?;
        let pending = self.pending.as_mut().ok_or(SimError::Unexpected {
            actor: ActorId::Client,
            from,
            message: "search_result",
        })?;
        // The server that sends a response completed its peer's share.
        if ActorId::server(resp.side.other()) != from {
            return Err(SimError::Order(format!("{from} answered for the wrong share")));
        }
        let slot = match resp.side {
            ShareIndex::One => 0,
            ShareIndex::Two => 1,
        };
        if pending.responses[slot].replace(resp).is_some() {
            return Err(SimError::Order("duplicate search result".into()));
        }
        let [Some(r1), Some(r2)] = &pending.responses else {
            return Ok(Vec::new());
        };
        let ids = client_recover(r1, r2, mode)?;
        let full = combined_bitmaps(r1, r2)?;
        let pk = &self.keys.as_ref().expect("ready checked").pk;
        self.redistribution = Some(index_redistribution(
            &pending.plan,
            &full,
            pk,
            &params,
            &mut self.rng,
        )?);
        if ids.is_empty() {
            self.pending = None;
            self.result = Some(ResultSet {
                ids,
                objects: Vec::new(),
            });
            return Ok(Vec::new());
        }
        pending.ids = Some(ids.clone());
        let bytes = Message::ObjectFetch(ids.into_iter().collect()).encode(self.epoch(), &self.codec())?;
        Ok(vec![Outgoing {
            to: ActorId::Cs1,
            bytes,
        }])
    }

    fn on_objects(&mut self, objs: Vec<StoredObject>) -> SimResult<Vec<Outgoing>> {
        let pending = self
            .pending
            .take()
            .ok_or_else(|| SimError::Order("objects without a query".into()))?;
        let ids = pending.ids.unwrap_or_default();
        let k_o = &self.keys.as_ref().expect("query implies keys").k_o;
        let mut objects = Vec::with_capacity(objs.len());
        for o in objs {
            let obj = SpatioTextualObject::from_bytes(&object_open(k_o, &o.sealed)?)?;
            if obj.id != o.id || !ids.contains(&o.id) {
                return Err(SimError::Order(format!("server returned object {}", o.id)));
            }
            objects.push(obj);
        }
        if objects.len() != ids.len() {
            return Err(SimError::Order("server returned too few objects".into()));
        }
        self.result = Some(ResultSet { ids, objects });
        Ok(Vec::new())
    }
}
