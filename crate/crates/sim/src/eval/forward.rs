//! Forward-security scan: update tokens issued at epoch `U` must share no
//! byte string with anything sent before `U`.

use std::collections::BTreeSet;

use brasp_core::protocol::{SystemConfig, TokenTarget};
use memchr::memmem;
use serde::{Deserialize, Serialize};

use crate::error::SimResult;
use crate::message::{Codec, Message};
use crate::transcript::Transcript;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForwardReport {
    /// Sequence number of the update-token envelope.
    pub seq: u64,
    pub epoch: u64,
    /// Distinct addresses, fresh labels and fresh tags it carries.
    pub elements: usize,
    /// Envelopes from earlier epochs that were searched.
    pub earlier_envelopes: usize,
    /// Elements found in at least one earlier envelope.
    pub links: usize,
}

/// One report per update-token envelope in the transcript.
pub fn forward_scan(transcript: &Transcript, config: &SystemConfig) -> SimResult<Vec<ForwardReport>> {
    let mut codec = Codec {
        group: config.group.clone(),
        pk: None,
        slot_bits: config.slot_bits,
    };
    let mut out = Vec::new();
    for e in &transcript.envelopes {
        if e.message == "server_keys" && codec.pk.is_none() {
            if let (_, Message::ServerKeys(k)) = Message::decode(&e.payload, &codec)? {
                codec.pk = Some(k.pk);
            }
            continue;
        }
        if e.message != "update_tokens" {
            continue;
        }
        let (_, Message::UpdateTokens { tokens, .. }) = Message::decode(&e.payload, &codec)? else {
            continue;
        };
        let mut elements: BTreeSet<Vec<u8>> = BTreeSet::new();
        for t in tokens.prefix.iter().chain(&tokens.keyword) {
            match &t.target {
                TokenTarget::Address(a) => {
                    elements.insert(a.as_bytes().to_vec());
                }
                TokenTarget::Fresh { label, tag } => {
                    elements.insert(label.as_bytes().to_vec());
                    elements.insert(tag.as_bytes().to_vec());
                }
            }
        }
        let earlier: Vec<&[u8]> = transcript
            .envelopes
            .iter()
            .filter(|x| x.epoch < e.epoch)
            .map(|x| x.payload.as_slice())
            .collect();
        let links = elements
            .iter()
            .filter(|el| {
                let f = memmem::Finder::new(el.as_slice());
                earlier.iter().any(|p| f.find(p).is_some())
            })
            .count();
        out.push(ForwardReport {
            seq: e.seq,
            epoch: e.epoch,
            elements: elements.len(),
            earlier_envelopes: earlier.len(),
            links,
        });
    }
    Ok(out)
}
