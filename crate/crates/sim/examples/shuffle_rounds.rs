//! Shuffle rounds move every entry to fresh bytes and positions while the
//! logical index stays the same.

use brasp_sim::eval::inspect::stored_fingerprints;
use brasp_sim::eval::logical_bitmaps;
use brasp_sim::fixtures::{sample_grid, sample_objects};
use brasp_sim::{Cadence, Deployment, Options};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let opts = Options::new(sample_grid(), 512, 3).with_cadence(Cadence::Manual);
    let mut d = Deployment::new(opts)?;
    d.ingest(sample_objects()?)?;
    d.build()?;

    let logical = logical_bitmaps(&d)?;
    for _ in 0..3 {
        let before = stored_fingerprints(&d);
        d.shuffle()?;
        let after = stored_fingerprints(&d);
        assert_eq!(logical_bitmaps(&d)?, logical);
        println!(
            "epoch {}: {} stored elements, {} carried over",
            d.epoch(),
            after.len(),
            before.intersection(&after).count()
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
