//! Corrected recovery combines shares before evaluating the query; the
//! literal variant evaluates inside each share and can miss matches whose
//! bits were split across the servers.

use brasp_core::protocol::RecoveryMode;
use brasp_sim::eval::pbrq_oracle;
use brasp_sim::fixtures::{sample_grid, sample_objects, sample_query};
use brasp_sim::{Deployment, Options};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let q = sample_query()?;
    for mode in [RecoveryMode::Corrected, RecoveryMode::Literal] {
        let mut hits = 0;
        for seed in 0..8 {
            let mut d = Deployment::new(Options::new(sample_grid(), 512, seed).with_mode(mode))?;
            d.ingest(sample_objects()?)?;
            d.build()?;
            let rs = d.search(&q)?;
            if rs.ids == pbrq_oracle(d.truth(), &q) {
                hits += 1;
            }
        }
        println!("{mode:?}: exact on {hits}/8 seeds");
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
