use brasp_core::crypto::object_seal;
use brasp_core::index::{
    build_plain_indexes, encrypted_index_build, validate_db, PackingParams, SpatioTextualObject,
};
use brasp_core::protocol::{setup, OwnerKeys, SystemConfig};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::actor::{ActorId, Outgoing};
use crate::error::{SimError, SimResult};
use crate::message::{Codec, Message, StoredObject};

/// Holds the plaintext database and the master secrets. Only ever sends.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DataOwner {
    config: SystemConfig,
    keys: Option<OwnerKeys>,
    db: Vec<SpatioTextualObject>,
    built: bool,
    rng: ChaCha20Rng,
}

impl DataOwner {
    pub fn new(config: SystemConfig, rng: ChaCha20Rng) -> Self {
        Self {
            config,
            keys: None,
            db: Vec::new(),
            built: false,
            rng,
        }
    }

    pub fn keys(&self) -> Option<&OwnerKeys> {
        self.keys.as_ref()
    }

    pub fn db(&self) -> &[SpatioTextualObject] {
        &self.db
    }

    pub fn is_built(&self) -> bool {
        self.built
    }

    fn codec(&self) -> Codec {
        Codec {
            group: self.config.group.clone(),
            pk: self.keys.as_ref().map(|k| k.paillier.public.clone()),
            slot_bits: self.config.slot_bits,
        }
    }

    /// Generates all key material and ships each party its share.
    pub fn setup(&mut self) -> SimResult<Vec<Outgoing>> {
        if self.keys.is_some() {
            return Err(SimError::Order("setup already ran".into()));
        }
        let km = setup(&self.config, &mut self.rng)?;
        self.keys = Some(km.owner);
        let codec = self.codec();
        let [s1, s2] = km.servers;
        Ok(vec![
            Outgoing {
                to: ActorId::Client,
                bytes: Message::ClientKeys(km.client).encode(0, &codec)?,
            },
            Outgoing {
                to: ActorId::Cs1,
                bytes: Message::ServerKeys(s1).encode(0, &codec)?,
            },
            Outgoing {
                to: ActorId::Cs2,
                bytes: Message::ServerKeys(s2).encode(0, &codec)?,
            },
        ])
    }

    pub fn ingest(&mut self, objects: Vec<SpatioTextualObject>) -> SimResult<()> {
        if self.built {
            return Err(SimError::Order(
                "ingest after build; insert new objects with update".into(),
            ));
        }
        let mut db = self.db.clone();
        db.extend(objects);
        validate_db(&db, self.config.bits())?;
        self.db = db;
        Ok(())
    }

    /// Builds and ships both index share sets, the sealed objects, and the
    /// client's starting state.
    pub fn build(&mut self) -> SimResult<Vec<Outgoing>> {
        if self.built {
            return Err(SimError::Order("indexes already built".into()));
        }
        let keys = self
            .keys
            .as_ref()
            .ok_or_else(|| SimError::Order("build before setup".into()))?;
        if self.db.is_empty() {
            return Err(SimError::Order("build with an empty database".into()));
        }
        let pk = &keys.paillier.public;
        let params = PackingParams::for_key(pk, self.config.slot_bits)?;
        let plain = build_plain_indexes(&self.db, self.config.bits())?;
        let [share1, share2] = encrypted_index_build(
            &plain,
            &self.config.group,
            &keys.k_m,
            &keys.k_t,
            pk,
            &params,
            &mut self.rng,
        )?;
        let sealed: Vec<StoredObject> = self
            .db
            .iter()
            .map(|o| StoredObject {
                id: o.id,
                sealed: object_seal(&keys.k_o, &o.to_bytes(), &mut self.rng),
            })
            .collect();
        let terms = plain.terms().map(|(t, _)| t).collect();
        let codec = self.codec();
        let out = vec![
            Outgoing {
                to: ActorId::Cs1,
                bytes: Message::IndexBuild(share1).encode(0, &codec)?,
            },
            Outgoing {
                to: ActorId::Cs2,
                bytes: Message::IndexBuild(share2).encode(0, &codec)?,
            },
            Outgoing {
                to: ActorId::Cs1,
                bytes: Message::ObjectStore(sealed.clone()).encode(0, &codec)?,
            },
            Outgoing {
                to: ActorId::Cs2,
                bytes: Message::ObjectStore(sealed).encode(0, &codec)?,
            },
            Outgoing {
                to: ActorId::Client,
                bytes: Message::ClientState {
                    n: self.db.len(),
                    terms,
                }
                .encode(0, &codec)?,
            },
        ];
        self.built = true;
        Ok(out)
    }

    pub fn handle(&mut self, from: ActorId, bytes: &[u8]) -> SimResult<Vec<Outgoing>> {
        let (_, msg) = Message::decode(bytes, &self.codec())?;
        Err(SimError::Unexpected {
            actor: ActorId::DataOwner,
            from,
            message: msg.name(),
        })
    }
}
