//! Four-party simulation of the encrypted Boolean range query protocol.
//!
//! A data owner, one authorized client and two non-colluding servers run as
//! actors over an in-process fabric. Every message is encoded to bytes,
//! logged to a [`Transcript`] and decoded by its receiver, so the transcript
//! is an exact record of what each party observed. The [`eval`] module
//! holds plaintext oracles, leakage analysis over transcripts and the
//! benchmark suite.

pub mod actor;
pub mod client;
pub mod deployment;
pub mod error;
pub mod eval;
pub mod fixtures;
mod hexser;
pub mod keys;
pub mod message;
pub mod owner;
pub mod persist;
pub mod records;
pub mod script;
pub mod server;
pub mod transcript;

pub use actor::ActorId;
pub use deployment::{Cadence, Deployment, Options};
pub use error::SimError;
pub use script::{simulate, Action, Script};
pub use transcript::{Envelope, Transcript};
