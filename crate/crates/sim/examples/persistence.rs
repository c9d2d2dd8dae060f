//! Save a deployment, load it in a fresh process image and carry on.

use brasp_sim::fixtures::{sample_grid, sample_objects, sample_query};
use brasp_sim::persist::{load, save};
use brasp_sim::{Deployment, Options};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("brasp-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("state.bin");

    let mut d = Deployment::new(Options::new(sample_grid(), 512, 13))?;
    d.ingest(sample_objects()?)?;
    d.build()?;
    save(&d, &path)?;
    println!("saved {} bytes at epoch {}", std::fs::metadata(&path)?.len(), d.epoch());

    let mut resumed = load(&path)?;
    let rs = resumed.search(&sample_query()?)?;
    println!("resumed search -> {:?}, epoch {}", rs.ids, resumed.epoch());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
