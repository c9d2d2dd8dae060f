//! Points to grid cells to Hilbert values, and rectangles to intervals.

use brasp_core::spatial::{hilbert_decode, hilbert_encode, region_to_intervals, GridSpec, Rect};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = GridSpec::unit(3)?;
    for (x, y) in [(0.05, 0.05), (0.3, 0.6), (0.99, 0.01)] {
        let cell = grid.quantize(x, y)?;
        let h = hilbert_encode(cell, &grid)?;
        assert_eq!(hilbert_decode(h, &grid)?, cell);
        println!("({x}, {y}) -> cell ({}, {}) -> {}", cell.x, cell.y, h.0);
    }
    let rect = Rect {
        x1: 0.5,
        y1: 0.5,
        x2: 1.0,
        y2: 0.75,
    };
    println!("rect -> {:?}", region_to_intervals(&rect, &grid).intervals());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
