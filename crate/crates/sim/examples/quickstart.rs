//! Build an encrypted index over five objects and run one Boolean range
//! query through both servers.
//!
//! ```bash
//! cargo run -p brasp-sim --example quickstart
//! ```

use brasp_sim::fixtures::{sample_grid, sample_objects, sample_query};
use brasp_sim::{Deployment, Options};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut d = Deployment::new(Options::new(sample_grid(), 512, 42))?;
    d.ingest(sample_objects()?)?;
    d.build()?;

    let q = sample_query()?;
    let rs = d.search(&q)?;
    println!("range {:?} with {:?}", q.range.intervals(), q.keywords);
    for o in &rs.objects {
        println!("  object {} at {} {:?}", o.id, o.loc.0, o.keywords);
    }
    assert_eq!(rs.ids.iter().copied().collect::<Vec<_>>(), [4]);
    println!("{} messages, epoch {}", d.transcript().len(), d.epoch());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
