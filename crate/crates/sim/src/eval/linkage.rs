//! What one server can link from its own view of the transcript.
//!
//! Three families of test run over the observer's envelopes:
//!
//! * repeated queries: byte-equal trapdoors between two tokens for the same
//!   query;
//! * per shuffle round: byte-equal labels, tags or ID ciphertexts between
//!   the shares the observer handed over and the shares it got back;
//! * position persistence: how often an entry keeps its index position
//!   across the peer's hop. Measuring this needs the peer's re-encryption
//!   key to normalize labels, so it is ground truth an evaluator supplies,
//!   not something the observer could compute.

use std::collections::HashSet;

use brasp_core::crypto::{tpf_reenc, PaillierPublicKey, ReEncKey};
use brasp_core::index::{IndexKind, ServerIndexes};
use brasp_core::protocol::{BooleanRangeQuery, SystemConfig, TrapdoorSet};
use serde::{Deserialize, Serialize};

use crate::actor::ActorId;
use crate::error::{SimError, SimResult};
use crate::eval::stats::binomial_interval;
use crate::message::{Codec, Message};
use crate::transcript::Transcript;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyResult {
    pub strategy: String,
    pub trials: u64,
    pub links: u64,
    pub rate: f64,
    /// Rate a guess with no information achieves.
    pub chance: f64,
    /// Whether `rate` is consistent with `chance`. For equality strategies
    /// that means no link at all; for persistence, inside the 99% interval.
    pub at_chance: bool,
}

impl StrategyResult {
    fn equality(strategy: &str, trials: u64, links: u64) -> Self {
        Self {
            strategy: strategy.into(),
            trials,
            links,
            rate: rate(links, trials),
            chance: 0.0,
            at_chance: links == 0,
        }
    }

    fn persistence(strategy: &str, trials: u64, links: u64, chance: f64) -> Self {
        let r = rate(links, trials);
        let (lo, hi) = binomial_interval(chance, trials.max(1), 0.99);
        Self {
            strategy: strategy.into(),
            trials,
            links,
            rate: r,
            chance,
            at_chance: trials == 0 || (lo..=hi).contains(&r),
        }
    }
}

fn rate(links: u64, trials: u64) -> f64 {
    if trials == 0 {
        0.0
    } else {
        links as f64 / trials as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Every strategy ran on some evidence and stayed at chance.
    Unlinkable,
    Linkable,
    /// Nothing in the view to test.
    NoEvidence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkageReport {
    pub observer: ActorId,
    pub queries: usize,
    pub shuffle_rounds: usize,
    pub strategies: Vec<StrategyResult>,
    /// One over the prefix index size, the baseline for position guesses.
    pub chance_baseline: f64,
    pub verdict: Verdict,
}

impl LinkageReport {
    pub fn strategy(&self, name: &str) -> Option<&StrategyResult> {
        self.strategies.iter().find(|s| s.strategy == name)
    }
}

/// The shares an observer gave up and received back in one shuffle round.
#[derive(Clone, Debug)]
pub struct RoundPair {
    pub pre: ServerIndexes,
    pub post: ServerIndexes,
}

struct ObserverView {
    pk: Option<PaillierPublicKey>,
    tokens: Vec<TrapdoorSet>,
    rounds: Vec<RoundPair>,
}

fn decode_view(transcript: &Transcript, observer: ActorId, config: &SystemConfig) -> SimResult<ObserverView> {
    if !observer.is_server() {
        return Err(SimError::Input(format!("{observer} is not a server")));
    }
    let mut codec = Codec {
        group: config.group.clone(),
        pk: None,
        slot_bits: config.slot_bits,
    };
    let mut out = ObserverView {
        pk: None,
        tokens: Vec::new(),
        rounds: Vec::new(),
    };
    let mut pre: Option<ServerIndexes> = None;
    let first = observer == ActorId::Cs1;
    for e in transcript.view(observer) {
        let interesting = matches!(
            e.message.as_str(),
            "server_keys" | "token" | "shuffle_request" | "shuffle_reply" | "shuffle_finish"
        );
        if !interesting {
            continue;
        }
        let (_, msg) = Message::decode(&e.payload, &codec)?;
        let sent = e.sender == observer;
        match msg {
            Message::ServerKeys(k) if !sent => {
                codec.pk = Some(k.pk.clone());
                out.pk = Some(k.pk);
            }
            Message::Token(t) if !sent => out.tokens.push(t),
            Message::ShuffleRequest(s) if sent && first => pre = Some(s),
            Message::ShuffleReply { processed, .. } if !sent && first => {
                let pre = pre.take().ok_or(SimError::Corrupt("shuffle reply without request"))?;
                out.rounds.push(RoundPair { pre, post: processed });
            }
            Message::ShuffleReply { peer, .. } if sent && !first => pre = Some(peer),
            Message::ShuffleFinish(s) if !sent && !first => {
                let pre = pre.take().ok_or(SimError::Corrupt("shuffle finish without reply"))?;
                out.rounds.push(RoundPair { pre, post: s });
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Pre and post shares of every shuffle round in the observer's view.
pub fn shuffle_rounds(transcript: &Transcript, observer: ActorId, config: &SystemConfig) -> SimResult<Vec<RoundPair>> {
    Ok(decode_view(transcript, observer, config)?.rounds)
}

fn label_set(t: &TrapdoorSet) -> HashSet<&[u8]> {
    t.iter().map(|(_, l)| l.as_bytes()).collect()
}

/// Pairs of tokens for the same query that share a byte-equal trapdoor.
fn trapdoor_equality(tokens: &[TrapdoorSet], history: &[BooleanRangeQuery]) -> StrategyResult {
    let (mut trials, mut links) = (0, 0);
    let n = tokens.len().min(history.len());
    for i in 0..n {
        let a = label_set(&tokens[i]);
        for j in i + 1..n {
            if history[i] != history[j] {
                continue;
            }
            trials += 1;
            if tokens[j].iter().any(|(_, l)| a.contains(l.as_bytes())) {
                links += 1;
            }
        }
    }
    StrategyResult::equality("trapdoor_equality", trials, links)
}

#[derive(Default)]
struct Fingerprints {
    labels: Vec<Vec<u8>>,
    tags: Vec<Vec<u8>>,
    ciphertexts: Vec<Vec<u8>>,
}

fn fingerprints(s: &ServerIndexes, pk: &PaillierPublicKey) -> Fingerprints {
    let mut f = Fingerprints::default();
    for idx in [&s.prefix, &s.keyword] {
        for e in &idx.entries {
            f.labels.push(e.label.as_bytes().to_vec());
            f.tags.push(e.tag.as_bytes().to_vec());
            f.ciphertexts.extend(e.id.chunks.iter().map(|c| pk.ciphertext_to_bytes(c)));
        }
    }
    f
}

fn count_shared(pre: &[Vec<u8>], post: &[Vec<u8>]) -> u64 {
    let seen: HashSet<&[u8]> = pre.iter().map(Vec::as_slice).collect();
    post.iter().filter(|p| seen.contains(p.as_slice())).count() as u64
}

/// Byte-equality links between the two sides of each round: labels, tags
/// and ciphertexts, as (trials, links) per category.
pub fn round_equality(round: &RoundPair, pk: &PaillierPublicKey) -> [(u64, u64); 3] {
    let a = fingerprints(&round.pre, pk);
    let b = fingerprints(&round.post, pk);
    [
        (b.labels.len() as u64, count_shared(&a.labels, &b.labels)),
        (b.tags.len() as u64, count_shared(&a.tags, &b.tags)),
        (b.ciphertexts.len() as u64, count_shared(&a.ciphertexts, &b.ciphertexts)),
    ]
}

/// Entries of `kind` whose position survived the peer's hop, as
/// (positions compared, fixed points). `peer_key` is the key the peer
/// re-encrypted labels with.
pub fn position_persistence(
    round: &RoundPair,
    kind: IndexKind,
    peer_key: &ReEncKey,
    config: &SystemConfig,
) -> SimResult<(u64, u64)> {
    let inv = peer_key.inverse(&config.group);
    let pre = &round.pre.get(kind).entries;
    let post = &round.post.get(kind).entries;
    if pre.len() != post.len() {
        return Err(SimError::Corrupt("shuffle changed the entry count"));
    }
    let mut fixed = 0;
    for (a, b) in pre.iter().zip(post) {
        if tpf_reenc(&config.group, &b.label, &inv)? == a.label {
            fixed += 1;
        }
    }
    Ok((pre.len() as u64, fixed))
}

/// Runs every strategy over `observer`'s view. `history` lists the client's
/// queries in order; `peer_key` enables the persistence measurement.
pub fn adversary_linkage(
    transcript: &Transcript,
    observer: ActorId,
    config: &SystemConfig,
    history: Option<&[BooleanRangeQuery]>,
    peer_key: Option<&ReEncKey>,
) -> SimResult<LinkageReport> {
    let view = decode_view(transcript, observer, config)?;
    let mut strategies = Vec::new();
    if let Some(h) = history {
        strategies.push(trapdoor_equality(&view.tokens, h));
    }
    let mut chance_baseline = 0.0;
    if !view.rounds.is_empty() {
        let pk = view
            .pk
            .as_ref()
            .ok_or(SimError::Corrupt("shuffle rounds before server keys"))?;
        let mut sums = [(0, 0); 3];
        for r in &view.rounds {
            for (s, (t, l)) in sums.iter_mut().zip(round_equality(r, pk)) {
                s.0 += t;
                s.1 += l;
            }
        }
        for (name, (t, l)) in ["label_equality", "tag_equality", "ciphertext_equality"]
            .into_iter()
            .zip(sums)
        {
            strategies.push(StrategyResult::equality(name, t, l));
        }
        if let Some(k) = peer_key {
            for (name, kind) in [
                ("position_persistence_prefix", IndexKind::Prefix),
                ("position_persistence_keyword", IndexKind::Keyword),
            ] {
                let size = view.rounds[0].pre.get(kind).len();
                if size == 0 {
                    continue;
                }
                let (mut t, mut l) = (0, 0);
                for r in &view.rounds {
                    let (a, b) = position_persistence(r, kind, k, config)?;
                    t += a;
                    l += b;
                }
                let chance = 1.0 / size as f64;
                if kind == IndexKind::Prefix {
                    chance_baseline = chance;
                }
                strategies.push(StrategyResult::persistence(name, t, l, chance));
            }
        }
    }
    let evidence = strategies.iter().any(|s| s.trials > 0);
    let verdict = if !evidence {
        Verdict::NoEvidence
    } else if strategies.iter().all(|s| s.at_chance) {
        Verdict::Unlinkable
    } else {
        Verdict::Linkable
    };
    Ok(LinkageReport {
        observer,
        queries: view.tokens.len(),
        shuffle_rounds: view.rounds.len(),
        strategies,
        chance_baseline,
        verdict,
    })
}
