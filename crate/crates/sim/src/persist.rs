//! State files: an 8-byte magic, a u32 format version, the SHA-256 of the
//! body, then the body as JSON.

use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::deployment::Deployment;
use crate::error::{SimError, SimResult};

pub const MAGIC: &[u8; 8] = b"BRASPSIM";
pub const VERSION: u32 = 1;
const PREAMBLE: usize = 8 + 4 + 32;

pub fn to_bytes(d: &Deployment) -> SimResult<Vec<u8>> {
    let body = serde_json::to_vec(d)?;
    let mut out = Vec::with_capacity(PREAMBLE + body.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_be_bytes());
    out.extend_from_slice(&Sha256::digest(&body));
    out.extend_from_slice(&body);
    Ok(out)
}

pub fn from_bytes(bytes: &[u8]) -> SimResult<Deployment> {
    if bytes.len() < PREAMBLE {
        return Err(SimError::Corrupt("file shorter than its preamble"));
    }
    if &bytes[..8] != MAGIC {
        return Err(SimError::Corrupt("bad magic"));
    }
    let version = u32::from_be_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(SimError::Version {
            found: version,
            expected: VERSION,
        });
    }
    let body = &bytes[PREAMBLE..];
    if Sha256::digest(body).as_slice() != &bytes[12..PREAMBLE] {
        return Err(SimError::Corrupt("checksum mismatch"));
    }
    Ok(serde_json::from_slice(body)?)
}

/// Writes through a temporary file so a crash never leaves a torn state.
pub fn save(d: &Deployment, path: &Path) -> SimResult<()> {
    let bytes = to_bytes(d)?;
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> SimResult<Deployment> {
    from_bytes(&fs::read(path)?)
}
