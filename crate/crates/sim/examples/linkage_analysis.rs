//! What a server learns from repeated queries, with and without shuffling.

use brasp_core::crypto::ShareIndex;
use brasp_sim::eval::adversary_linkage;
use brasp_sim::fixtures::{sample_grid, sample_objects, sample_query};
use brasp_sim::{ActorId, Cadence, Deployment, Options};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let q = sample_query()?;
    for cadence in [Cadence::Manual, Cadence::AfterSearch] {
        let mut d = Deployment::new(Options::new(sample_grid(), 512, 9).with_cadence(cadence))?;
        d.ingest(sample_objects()?)?;
        d.build()?;
        for _ in 0..4 {
            d.search(&q)?;
        }
        let peer_key = d.server(ShareIndex::Two).keys().map(|k| k.r.clone());
        let report = adversary_linkage(d.transcript(), ActorId::Cs1, d.config(), Some(d.history()), peer_key.as_ref())?;
        println!("{cadence:?}: {:?}", report.verdict);
        for s in &report.strategies {
            println!("  {:<30} {:>5}/{:<6} chance {:.4}", s.strategy, s.links, s.trials, s.chance);
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
