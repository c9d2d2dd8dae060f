//! The four actors on one deterministic fabric.
//!
//! Messages go into a single FIFO queue and each is handled to completion
//! before the next is taken, so channel order is preserved and a seed fixes
//! every byte of the transcript. Operations are exclusive: each public call
//! runs until the fabric is quiet.

use std::collections::VecDeque;

use brasp_core::crypto::ShareIndex;
use brasp_core::index::SpatioTextualObject;
use brasp_core::protocol::{BooleanRangeQuery, RecoveryMode, ResultSet, SystemConfig};
use brasp_core::spatial::{GridSpec, HilbertValue};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::actor::{ActorId, Outgoing};
use crate::client::Client;
use crate::error::{SimError, SimResult};
use crate::keys::scan_transcript;
use crate::owner::DataOwner;
use crate::records::{to_objects, ObjectRecord};
use crate::server::Server;
use crate::transcript::Transcript;

/// When shuffle rounds run on their own.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cadence {
    /// After the index build and after every redistribution.
    #[default]
    AfterSearch,
    /// Only when asked.
    Manual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Options {
    pub seed: u64,
    pub paillier_bits: u64,
    pub grid: GridSpec,
    pub mode: RecoveryMode,
    pub cadence: Cadence,
}

impl Options {
    pub fn new(grid: GridSpec, paillier_bits: u64, seed: u64) -> Self {
        Self {
            seed,
            paillier_bits,
            grid,
            mode: RecoveryMode::Corrected,
            cadence: Cadence::AfterSearch,
        }
    }

    pub fn with_mode(mut self, mode: RecoveryMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_cadence(mut self, cadence: Cadence) -> Self {
        self.cadence = cadence;
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Queued {
    from: ActorId,
    to: ActorId,
    bytes: Vec<u8>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Deployment {
    options: Options,
    config: SystemConfig,
    owner: DataOwner,
    client: Client,
    servers: [Server; 2],
    queue: VecDeque<Queued>,
    transcript: Transcript,
    /// Plaintext objects including later insertions, for evaluation only.
    truth: Vec<SpatioTextualObject>,
    history: Vec<BooleanRangeQuery>,
}

impl Deployment {
    /// Creates the actors and runs key setup.
    pub fn new(options: Options) -> SimResult<Self> {
        let config = SystemConfig::new(options.grid, options.paillier_bits);
        let mut master = ChaCha20Rng::seed_from_u64(options.seed);
        let mut fork = || ChaCha20Rng::from_seed(master.gen());
        let owner = DataOwner::new(config.clone(), fork());
        let client = Client::new(config.clone(), options.mode, fork());
        let servers = [
            Server::new(ShareIndex::One, config.clone(), options.mode, fork()),
            Server::new(ShareIndex::Two, config.clone(), options.mode, fork()),
        ];
        let mut d = Self {
            options,
            config,
            owner,
            client,
            servers,
            queue: VecDeque::new(),
            transcript: Transcript::default(),
            truth: Vec::new(),
            history: Vec::new(),
        };
        let out = d.owner.setup()?;
        d.deliver(ActorId::DataOwner, out)?;
        Ok(d)
    }

    pub fn options(&self) -> &Options {
        &self.options
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn grid(&self) -> &GridSpec {
        &self.config.grid
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn owner(&self) -> &DataOwner {
        &self.owner
    }

    pub fn client(&self) -> &Client {
        &self.client
    }

    pub fn server(&self, side: ShareIndex) -> &Server {
        match side {
            ShareIndex::One => &self.servers[0],
            ShareIndex::Two => &self.servers[1],
        }
    }

    /// Every object the system holds, in plaintext.
    pub fn truth(&self) -> &[SpatioTextualObject] {
        &self.truth
    }

    /// Queries issued so far, in order.
    pub fn history(&self) -> &[BooleanRangeQuery] {
        &self.history
    }

    pub fn epoch(&self) -> u64 {
        self.client.epoch()
    }

    fn deliver(&mut self, from: ActorId, out: Vec<Outgoing>) -> SimResult<()> {
        for o in out {
            self.queue.push_back(Queued {
                from,
                to: o.to,
                bytes: o.bytes,
            });
        }
        while let Some(q) = self.queue.pop_front() {
            self.transcript.record(q.from, q.to, q.bytes.clone())?;
            let replies = match q.to {
                ActorId::DataOwner => self.owner.handle(q.from, &q.bytes),
                ActorId::Client => self.client.handle(q.from, &q.bytes),
                ActorId::Cs1 => self.servers[0].handle(q.from, &q.bytes),
                ActorId::Cs2 => self.servers[1].handle(q.from, &q.bytes),
            };
            let replies = match replies {
                Ok(r) => r,
                Err(e) => {
                    self.queue.clear();
                    return Err(e);
                }
            };
            for o in replies {
                self.queue.push_back(Queued {
                    from: q.to,
                    to: o.to,
                    bytes: o.bytes,
                });
            }
        }
        Ok(())
    }

    pub fn ingest(&mut self, objects: Vec<SpatioTextualObject>) -> SimResult<()> {
        self.owner.ingest(objects.clone())?;
        self.truth.extend(objects);
        Ok(())
    }

    /// Ingests user records, numbering them after the objects already held.
    pub fn ingest_records(&mut self, records: &[ObjectRecord]) -> SimResult<()> {
        let objs = to_objects(records, self.truth.len() as u32, &self.config.grid)?;
        self.ingest(objs)
    }

    pub fn build(&mut self) -> SimResult<()> {
        let out = self.owner.build()?;
        self.deliver(ActorId::DataOwner, out)?;
        if self.options.cadence == Cadence::AfterSearch {
            self.shuffle()?;
        }
        Ok(())
    }

    /// One full shuffle round.
    pub fn shuffle(&mut self) -> SimResult<()> {
        if !self.owner.is_built() {
            return Err(SimError::Order("shuffle before build".into()));
        }
        if self.client.query_in_flight() || self.client.redistribution_due() {
            return Err(SimError::Order("shuffle between a query and its redistribution".into()));
        }
        let before = self.client.epoch();
        let out = self.servers[0].start_shuffle()?;
        self.deliver(ActorId::Cs1, out)?;
        if self.client.epoch() != before + 1 {
            return Err(SimError::Order("shuffle round did not complete".into()));
        }
        Ok(())
    }

    /// Runs a query and returns its results. The redistribution that must
    /// follow is left to [`Deployment::redistribute`].
    pub fn query(&mut self, q: &BooleanRangeQuery) -> SimResult<ResultSet> {
        if !self.owner.is_built() {
            return Err(SimError::Order("query before build".into()));
        }
        let out = self.client.start_query(q)?;
        self.history.push(q.clone());
        self.deliver(ActorId::Client, out)?;
        self.client
            .take_result()
            .ok_or_else(|| SimError::Order("query did not complete".into()))
    }

    pub fn redistribute(&mut self) -> SimResult<()> {
        let out = self.client.start_redistribution()?;
        self.deliver(ActorId::Client, out)?;
        if self.options.cadence == Cadence::AfterSearch {
            self.shuffle()?;
        }
        Ok(())
    }

    /// Query, redistribution and, under the default cadence, a shuffle.
    pub fn search(&mut self, q: &BooleanRangeQuery) -> SimResult<ResultSet> {
        let rs = self.query(q)?;
        self.redistribute()?;
        Ok(rs)
    }

    /// Inserts one object. Its id must be the next free one.
    pub fn update(&mut self, obj: SpatioTextualObject) -> SimResult<()> {
        if !self.owner.is_built() {
            return Err(SimError::Order("update before build".into()));
        }
        let out = self.client.start_update(&obj)?;
        self.deliver(ActorId::Client, out)?;
        if self.client.update_in_flight() {
            return Err(SimError::Order("update did not complete".into()));
        }
        self.truth.push(obj);
        Ok(())
    }

    /// Inserts an object at `loc` under the next free id, which is returned.
    pub fn insert<I, S>(&mut self, loc: HilbertValue, keywords: I) -> SimResult<u32>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let id = self.client.object_count() as u32;
        self.update(SpatioTextualObject::new(id, loc, keywords)?)?;
        Ok(id)
    }

    pub fn update_record(&mut self, record: &ObjectRecord) -> SimResult<u32> {
        let id = self.client.object_count() as u32;
        let obj = record.to_object(id, &self.config.grid)?;
        self.update(obj)?;
        Ok(id)
    }

    /// Scans the transcript for secrets outside their allowed holders.
    pub fn check_key_containment(&self) -> SimResult<()> {
        let (Some(owner), Some(client)) = (self.owner.keys(), self.client.keys()) else {
            return Err(SimError::Order("setup has not run".into()));
        };
        let (Some(k1), Some(k2)) = (self.servers[0].keys(), self.servers[1].keys()) else {
            return Err(SimError::Order("setup has not run".into()));
        };
        scan_transcript(
            &self.transcript,
            &self.config.group,
            owner,
            client,
            [k1, k2],
        )
    }
}
