//! Who may hold which secret, and a transcript scan that enforces it.

use brasp_core::crypto::GroupParams;
use brasp_core::protocol::{ClientKeys, OwnerKeys, ServerKeys};
use memchr::memmem;

use crate::actor::ActorId;
use crate::error::{SimError, SimResult};
use crate::transcript::Transcript;

/// A secret and the actors allowed to receive it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Holding {
    pub secret: &'static str,
    pub holders: &'static [ActorId],
}

use ActorId::{Client, Cs1, Cs2, DataOwner};

/// The distribution table. The owner generates everything.
pub const KEY_DISTRIBUTION: &[Holding] = &[
    Holding {
        secret: "k_M",
        holders: &[DataOwner],
    },
    Holding {
        secret: "paillier_secret",
        holders: &[DataOwner],
    },
    Holding {
        secret: "k_u",
        holders: &[DataOwner, Client],
    },
    Holding {
        secret: "r1",
        holders: &[DataOwner, Client, Cs1],
    },
    Holding {
        secret: "r2",
        holders: &[DataOwner, Client, Cs2],
    },
    Holding {
        secret: "sk1",
        holders: &[DataOwner, Cs1],
    },
    Holding {
        secret: "sk2",
        holders: &[DataOwner, Cs2],
    },
    Holding {
        secret: "rk_u_to_M",
        holders: &[DataOwner, Cs1, Cs2],
    },
    Holding {
        secret: "k_T",
        holders: &[DataOwner, Client],
    },
    Holding {
        secret: "k_O",
        holders: &[DataOwner, Client],
    },
    Holding {
        secret: "k_P",
        holders: &[DataOwner, Client, Cs1, Cs2],
    },
];

pub fn holders(secret: &str) -> Option<&'static [ActorId]> {
    KEY_DISTRIBUTION
        .iter()
        .find(|h| h.secret == secret)
        .map(|h| h.holders)
}

/// Byte encodings of every secret, keyed by table name.
pub fn secret_bytes(
    group: &GroupParams,
    owner: &OwnerKeys,
    client: &ClientKeys,
    servers: [&ServerKeys; 2],
) -> Vec<(&'static str, Vec<u8>)> {
    let mut out = vec![("k_M", owner.k_m.to_bytes(group))];
    for fp in owner.paillier.secret.secret_fingerprints() {
        out.push(("paillier_secret", fp));
    }
    out.push(("k_u", client.k_u.to_bytes(group)));
    out.push(("r1", client.r1.to_bytes(group)));
    out.push(("r2", client.r2.to_bytes(group)));
    out.push(("sk1", servers[0].d.exponent().to_bytes_be()));
    out.push(("sk2", servers[1].d.exponent().to_bytes_be()));
    out.push(("rk_u_to_M", servers[0].rk_u_to_m.to_bytes(group)));
    out.push(("k_T", client.k_t.as_bytes().to_vec()));
    out.push(("k_O", client.k_o.as_bytes().to_vec()));
    out.push(("k_P", client.k_p.as_bytes().to_vec()));
    out
}

/// Fails on the first envelope that carries a secret to an actor outside
/// the secret's holder set.
pub fn scan_transcript(
    transcript: &Transcript,
    group: &GroupParams,
    owner: &OwnerKeys,
    client: &ClientKeys,
    servers: [&ServerKeys; 2],
) -> SimResult<()> {
    let secrets = secret_bytes(group, owner, client, servers);
    let finders: Vec<_> = secrets
        .iter()
        .map(|(name, bytes)| (*name, holders(name).expect("listed"), memmem::Finder::new(bytes)))
        .collect();
    for e in &transcript.envelopes {
        for (name, allowed, finder) in &finders {
            if !allowed.contains(&e.receiver) && finder.find(&e.payload).is_some() {
                return Err(SimError::KeyLeak(format!(
                    "{name} reached {} in envelope {}",
                    e.receiver, e.seq
                )));
            }
        }
    }
    Ok(())
}
