//! Scripted runs: an ordered action list executed on a fresh deployment.

use brasp_core::protocol::{RecoveryMode, ResultSet};
use brasp_core::spatial::GridSpec;
use serde::{Deserialize, Serialize};

use crate::deployment::{Cadence, Deployment, Options};
use crate::error::{SimError, SimResult};
use crate::records::{ObjectRecord, QuerySpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Ingest { objects: Vec<ObjectRecord> },
    Build,
    Shuffle,
    Query(QuerySpec),
    Redistribute,
    Update { object: ObjectRecord },
}

fn default_bits() -> u64 {
    2048
}

fn default_grid() -> GridSpec {
    GridSpec::unit(3).expect("order 3 is valid")
}

fn default_mode() -> RecoveryMode {
    RecoveryMode::Corrected
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Script {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bits")]
    pub paillier_bits: u64,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default = "default_mode")]
    pub mode: RecoveryMode,
    #[serde(default)]
    pub cadence: Cadence,
    pub actions: Vec<Action>,
}

impl Script {
    pub fn options(&self) -> Options {
        Options::new(self.grid, self.paillier_bits, self.seed)
            .with_mode(self.mode)
            .with_cadence(self.cadence)
    }

    /// Static order checks: a build precedes everything that touches the
    /// index, happens once, and every query is immediately followed by its
    /// redistribution.
    pub fn validate(&self) -> SimResult<()> {
        let mut built = false;
        for (i, a) in self.actions.iter().enumerate() {
            let needs_build = !matches!(a, Action::Ingest { .. } | Action::Build);
            if needs_build && !built {
                return Err(SimError::Order(format!("action {i} comes before build")));
            }
            match a {
                Action::Build if built => {
                    return Err(SimError::Order(format!("action {i}: second build")))
                }
                Action::Build => built = true,
                Action::Ingest { .. } if built => {
                    return Err(SimError::Order(format!(
                        "action {i}: ingest after build, use update"
                    )))
                }
                Action::Query(_) => {
                    if !matches!(self.actions.get(i + 1), Some(Action::Redistribute)) {
                        return Err(SimError::Order(format!(
                            "action {i}: a query must be followed by redistribute"
                        )));
                    }
                }
                Action::Redistribute => {
                    if i == 0 || !matches!(self.actions[i - 1], Action::Query(_)) {
                        return Err(SimError::Order(format!(
                            "action {i}: redistribute without a preceding query"
                        )));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Runs `actions` on an existing deployment and collects query results.
pub fn run_actions(d: &mut Deployment, actions: &[Action]) -> SimResult<Vec<ResultSet>> {
    let mut results = Vec::new();
    for a in actions {
        match a {
            Action::Ingest { objects } => d.ingest_records(objects)?,
            Action::Build => d.build()?,
            Action::Shuffle => d.shuffle()?,
            Action::Query(spec) => {
                let q = spec.to_query(d.grid())?;
                results.push(d.query(&q)?);
            }
            Action::Redistribute => d.redistribute()?,
            Action::Update { object } => {
                d.update_record(object)?;
            }
        }
    }
    Ok(results)
}

pub struct Outcome {
    pub deployment: Deployment,
    pub results: Vec<ResultSet>,
}

pub fn simulate(script: &Script) -> SimResult<Outcome> {
    script.validate()?;
    let mut deployment = Deployment::new(script.options())?;
    let results = run_actions(&mut deployment, &script.actions)?;
    Ok(Outcome {
        deployment,
        results,
    })
}
