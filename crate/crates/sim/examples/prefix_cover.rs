//! Minimum prefix covers of Hilbert intervals and the membership test they
//! support.

use brasp_core::spatial::{membership_check, min_prefix_cover, SpatialRange};
use brasp_sim::eval::min_cover_oracle;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for iv in [vec![(20, 24)], vec![(0, 63)], vec![(45, 51), (54, 55)], vec![(7, 7)]] {
        let r = SpatialRange::new(6, iv.clone())?;
        let cover = min_prefix_cover(&r);
        let shown: Vec<String> = cover.elements.iter().map(ToString::to_string).collect();
        println!("{iv:?} -> {}", shown.join(" "));
        assert_eq!(cover.elements, min_cover_oracle(&r)?);
        for x in 0..64 {
            assert_eq!(membership_check(x, &cover), r.contains(x));
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
