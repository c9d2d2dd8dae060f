use std::fmt;

use brasp_core::crypto::ShareIndex;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActorId {
    DataOwner,
    Client,
    Cs1,
    Cs2,
}

impl ActorId {
    pub const ALL: [ActorId; 4] = [
        ActorId::DataOwner,
        ActorId::Client,
        ActorId::Cs1,
        ActorId::Cs2,
    ];

    pub fn server(side: ShareIndex) -> Self {
        match side {
            ShareIndex::One => ActorId::Cs1,
            ShareIndex::Two => ActorId::Cs2,
        }
    }

    pub fn is_server(self) -> bool {
        matches!(self, ActorId::Cs1 | ActorId::Cs2)
    }

    pub fn name(self) -> &'static str {
        match self {
            ActorId::DataOwner => "DO",
            ActorId::Client => "client",
            ActorId::Cs1 => "CS1",
            ActorId::Cs2 => "CS2",
        }
    }
}

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ActorId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "do" | "owner" | "data_owner" => Ok(ActorId::DataOwner),
            "client" => Ok(ActorId::Client),
            "cs1" => Ok(ActorId::Cs1),
            "cs2" => Ok(ActorId::Cs2),
            other => Err(format!("unknown actor {other:?}")),
        }
    }
}

/// A message an actor wants delivered, already encoded.
#[derive(Clone, Debug)]
pub struct Outgoing {
    pub to: ActorId,
    pub bytes: Vec<u8>,
}
