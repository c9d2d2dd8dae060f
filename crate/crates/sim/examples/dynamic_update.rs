//! Insert an object after a search, find it, and check that its update
//! tokens share nothing with earlier traffic.

use std::collections::BTreeSet;

use brasp_core::protocol::BooleanRangeQuery;
use brasp_core::spatial::{HilbertValue, SpatialRange};
use brasp_sim::eval::forward_scan;
use brasp_sim::fixtures::{sample_grid, sample_objects, sample_query};
use brasp_sim::{Deployment, Options};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut d = Deployment::new(Options::new(sample_grid(), 512, 5))?;
    d.ingest(sample_objects()?)?;
    d.build()?;
    d.search(&sample_query()?)?;

    let id = d.insert(HilbertValue(47), ["w4", "w6", "cafe"])?;
    println!("inserted object {id} at epoch {}", d.epoch());
    assert_eq!(d.search(&sample_query()?)?.ids, BTreeSet::from([4, id]));

    let all = SpatialRange::new(6, vec![(0, 63)])?;
    let rs = d.search(&BooleanRangeQuery::new(all, ["cafe"])?)?;
    println!("cafe -> {:?}", rs.ids);

    for r in forward_scan(d.transcript(), d.config())? {
        println!(
            "tokens at epoch {}: {} elements against {} earlier messages, {} links",
            r.epoch, r.elements, r.earlier_envelopes, r.links
        );
        assert_eq!(r.links, 0);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
