//! Export the wire transcript as JSONL, read it back, account bytes per
//! phase and check that no secret reached a party outside its holders.

use brasp_sim::fixtures::{sample_grid, sample_objects, sample_query};
use brasp_sim::keys::KEY_DISTRIBUTION;
use brasp_sim::{Deployment, Options, Transcript};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut d = Deployment::new(Options::new(sample_grid(), 512, 8))?;
    d.ingest(sample_objects()?)?;
    d.build()?;
    d.search(&sample_query()?)?;

    let mut buf = Vec::new();
    d.transcript().write_jsonl(&mut buf)?;
    let back = Transcript::read_jsonl(buf.as_slice())?;
    assert_eq!(&back, d.transcript());
    back.check_ordering()?;

    for (phase, bytes) in back.bytes_by_phase() {
        println!("{phase:>12}: {bytes} bytes");
    }
    for h in KEY_DISTRIBUTION {
        let names: Vec<String> = h.holders.iter().map(ToString::to_string).collect();
        println!("{:>16} held by {}", h.secret, names.join(", "));
    }
    d.check_key_containment()?;
    println!("key containment holds over {} messages", back.len());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
