//! A small benchmark sweep written as CSV to stdout.

use brasp_sim::eval::bench::{build_fit, write_csv, Workload};
use brasp_sim::eval::{bench, Suite};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let w = Workload {
        n: 20,
        m_grid: vec![10, 40, 70],
        reps: 2,
        paillier_bits: 512,
        ..Workload::desk()
    };
    let records = bench(Suite::Build, &w)?;
    write_csv(&records, std::io::stdout().lock())?;
    let fit = build_fit(&records, w.order);
    println!("build ms per entry {:.4}, R² {:.3}", fit.slope, fit.r2);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
