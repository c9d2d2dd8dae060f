//! Drive a whole session from a JSON action list.

use brasp_sim::records::ResultRecord;
use brasp_sim::{simulate, Script};

const SCRIPT: &str = r#"{
  "seed": 21,
  "paillier_bits": 512,
  "actions": [
    {"action": "ingest", "objects": [
      {"x": 0.10, "y": 0.20, "keywords": ["park", "cafe"]},
      {"x": 0.80, "y": 0.75, "keywords": ["cafe", "wifi"]},
      {"x": 0.82, "y": 0.70, "keywords": ["wifi"]}
    ]},
    {"action": "build"},
    {"action": "query", "rect": {"x1": 0.5, "y1": 0.5, "x2": 1.0, "y2": 1.0}, "keywords": ["wifi"]},
    {"action": "redistribute"},
    {"action": "update", "object": {"x": 0.9, "y": 0.9, "keywords": ["wifi", "bar"]}},
    {"action": "query", "rect": {"x1": 0.5, "y1": 0.5, "x2": 1.0, "y2": 1.0}, "keywords": ["wifi"]},
    {"action": "redistribute"}
  ]
}"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let script: Script = serde_json::from_str(SCRIPT)?;
    let out = simulate(&script)?;
    for rs in &out.results {
        println!("{}", serde_json::to_string(&ResultRecord::new(rs, out.deployment.grid())?)?);
    }
    assert_eq!(out.results[1].ids.len(), out.results[0].ids.len() + 1);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
