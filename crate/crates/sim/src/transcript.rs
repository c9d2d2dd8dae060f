use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use brasp_core::wire::{Reader, HEADER_LEN};
use serde::{Deserialize, Serialize};

use crate::actor::ActorId;
use crate::error::{SimError, SimResult};
use crate::message::{code_name, code_phase, Phase};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub seq: u64,
    pub sender: ActorId,
    pub receiver: ActorId,
    pub epoch: u64,
    pub phase: Phase,
    pub message: String,
    /// Header item count: trapdoors, entries or tokens.
    pub count: u32,
    pub size: usize,
    #[serde(with = "crate::hexser")]
    pub payload: Vec<u8>,
}

impl Envelope {
    pub fn involves(&self, actor: ActorId) -> bool {
        self.sender == actor || self.receiver == actor
    }

    /// Checks the derived fields against the payload header.
    pub fn validate(&self) -> SimResult<()> {
        let (h, _) = Reader::new(&self.payload)?;
        let ok = self.size == self.payload.len()
            && h.epoch == self.epoch
            && h.count == self.count
            && code_phase(h.phase) == Some(self.phase)
            && code_name(h.phase) == Some(self.message.as_str());
        if ok {
            Ok(())
        } else {
            Err(SimError::Corrupt("envelope fields disagree with payload header"))
        }
    }
}

/// The global, ordered envelope log of one run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub envelopes: Vec<Envelope>,
}

impl Transcript {
    pub fn record(&mut self, sender: ActorId, receiver: ActorId, payload: Vec<u8>) -> SimResult<&Envelope> {
        if payload.len() < HEADER_LEN {
            return Err(SimError::Corrupt("payload shorter than header"));
        }
        let (h, _) = Reader::new(&payload)?;
        let phase = code_phase(h.phase).ok_or(brasp_core::Error::Decode("unknown message code"))?;
        let env = Envelope {
            seq: self.envelopes.len() as u64,
            sender,
            receiver,
            epoch: h.epoch,
            phase,
            message: code_name(h.phase).expect("known code").to_string(),
            count: h.count,
            size: payload.len(),
            payload,
        };
        self.envelopes.push(env);
        Ok(self.envelopes.last().expect("just pushed"))
    }

    pub fn len(&self) -> usize {
        self.envelopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envelopes.is_empty()
    }

    /// Everything `actor` sent or received.
    pub fn view(&self, actor: ActorId) -> impl Iterator<Item = &Envelope> {
        self.envelopes.iter().filter(move |e| e.involves(actor))
    }

    pub fn since(&self, seq: u64) -> &[Envelope] {
        let start = (seq as usize).min(self.envelopes.len());
        &self.envelopes[start..]
    }

    pub fn by_message<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Envelope> + 'a {
        self.envelopes.iter().filter(move |e| e.message == name)
    }

    pub fn bytes_by_phase(&self) -> BTreeMap<Phase, usize> {
        let mut out = BTreeMap::new();
        for e in &self.envelopes {
            *out.entry(e.phase).or_insert(0) += e.size;
        }
        out
    }

    /// Sequence numbers strictly increase and epochs never go back.
    pub fn check_ordering(&self) -> SimResult<()> {
        let mut epoch = 0;
        for (i, e) in self.envelopes.iter().enumerate() {
            if e.seq != i as u64 {
                return Err(SimError::Corrupt("sequence numbers not contiguous"));
            }
            if e.epoch < epoch {
                return Err(SimError::Order(format!(
                    "envelope {} at epoch {} after epoch {epoch}",
                    e.seq, e.epoch
                )));
            }
            epoch = e.epoch;
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> SimResult<()> {
        for e in &self.envelopes {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> SimResult<Self> {
        let mut envelopes = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let e: Envelope = serde_json::from_str(&line)?;
            e.validate()?;
            envelopes.push(e);
        }
        let t = Self { envelopes };
        t.check_ordering()?;
        Ok(t)
    }
}
