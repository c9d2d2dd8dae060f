//! JSON input and output shapes for objects, queries and results.

use std::io::BufRead;

use brasp_core::index::SpatioTextualObject;
use brasp_core::protocol::{BooleanRangeQuery, ResultSet};
use brasp_core::spatial::{hilbert_decode, hilbert_encode, GridSpec, HilbertValue, Rect, SpatialRange};
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

/// One object as supplied by the user. Give either a coordinate pair, which
/// is quantized onto the grid, or a raw Hilbert value `loc`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loc: Option<u64>,
    pub keywords: Vec<String>,
}

impl ObjectRecord {
    pub fn to_object(&self, id: u32, grid: &GridSpec) -> SimResult<SpatioTextualObject> {
        if let Some(given) = self.id {
            if given != id {
                return Err(SimError::Input(format!(
                    "object id {given} out of sequence, expected {id}"
                )));
            }
        }
        let loc = match (self.x, self.y, self.loc) {
            (Some(x), Some(y), None) => hilbert_encode(grid.quantize(x, y)?, grid)?,
            (None, None, Some(v)) => {
                if v >= grid.cell_count() {
                    return Err(SimError::Input(format!("loc {v} outside the grid")));
                }
                HilbertValue(v)
            }
            _ => {
                return Err(SimError::Input(format!(
                    "object {id}: give either x and y or loc"
                )))
            }
        };
        Ok(SpatioTextualObject::new(id, loc, &self.keywords)?)
    }
}

/// Objects numbered from `first_id` in record order.
pub fn to_objects(
    records: &[ObjectRecord],
    first_id: u32,
    grid: &GridSpec,
) -> SimResult<Vec<SpatioTextualObject>> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| r.to_object(first_id + i as u32, grid))
        .collect()
}

pub fn read_jsonl<R: BufRead>(r: R) -> SimResult<Vec<ObjectRecord>> {
    let mut out = Vec::new();
    for (no, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| SimError::Input(format!("line {}: {e}", no + 1)))?,
        );
    }
    Ok(out)
}

/// A query as supplied by the user: a rectangle or explicit Hilbert
/// intervals, plus keywords that must all be present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rect: Option<Rect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<(u64, u64)>>,
    #[serde(default)]
    pub keywords: Vec<String>,
}

impl QuerySpec {
    pub fn to_query(&self, grid: &GridSpec) -> SimResult<BooleanRangeQuery> {
        match (&self.rect, &self.intervals) {
            (Some(rect), None) => Ok(BooleanRangeQuery::from_rect(rect, grid, &self.keywords)?),
            (None, Some(iv)) => Ok(BooleanRangeQuery::new(
                SpatialRange::new(grid.bits(), iv.clone())?,
                &self.keywords,
            )?),
            _ => Err(SimError::Input("a query needs exactly one of rect or intervals".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultObject {
    pub id: u32,
    pub loc: u64,
    pub cell: (u32, u32),
    pub keywords: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub ids: Vec<u32>,
    pub objects: Vec<ResultObject>,
}

impl ResultRecord {
    pub fn new(rs: &ResultSet, grid: &GridSpec) -> SimResult<Self> {
        let objects = rs
            .objects
            .iter()
            .map(|o| {
                let c = hilbert_decode(o.loc, grid)?;
                Ok(ResultObject {
                    id: o.id,
                    loc: o.loc.0,
                    cell: (c.x, c.y),
                    keywords: o.keywords.iter().cloned().collect(),
                })
            })
            .collect::<SimResult<_>>()?;
        Ok(Self {
            ids: rs.ids.iter().copied().collect(),
            objects,
        })
    }
}
