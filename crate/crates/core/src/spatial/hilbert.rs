//! Two-dimensional Hilbert curve in the standard recursive orientation:
//! the curve starts at cell (0, 0) and ends at (side - 1, 0).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::grid::{Cell, CellRect, GridSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HilbertValue(pub u64);

fn rotate(s: u64, x: &mut u64, y: &mut u64, rx: u64, ry: u64) {
    if ry == 0 {
        if rx == 1 {
            *x = s.wrapping_sub(1).wrapping_sub(*x);
            *y = s.wrapping_sub(1).wrapping_sub(*y);
        }
        std::mem::swap(x, y);
    }
}

pub fn hilbert_encode(cell: Cell, grid: &GridSpec) -> Result<HilbertValue> {
    let side = grid.side() as u64;
    let (mut x, mut y) = (cell.x as u64, cell.y as u64);
    if x >= side || y >= side {
        return Err(Error::OutOfRange {
            value: x.max(y),
            bits: grid.bits(),
        });
    }
    let mut d = 0u64;
    let mut s = side / 2;
    while s > 0 {
        let rx = u64::from(x & s > 0);
        let ry = u64::from(y & s > 0);
        d += s * s * ((3 * rx) ^ ry);
        rotate(side, &mut x, &mut y, rx, ry);
        x &= side - 1;
        y &= side - 1;
        s /= 2;
    }
    Ok(HilbertValue(d))
}

pub fn hilbert_decode(v: HilbertValue, grid: &GridSpec) -> Result<Cell> {
    if v.0 >= grid.cell_count() {
        return Err(Error::OutOfRange {
            value: v.0,
            bits: grid.bits(),
        });
    }
    let side = grid.side() as u64;
    let (mut x, mut y) = (0u64, 0u64);
    let mut t = v.0;
    let mut s = 1u64;
    while s < side {
        let rx = 1 & (t / 2);
        let ry = 1 & (t ^ rx);
        rotate(s, &mut x, &mut y, rx, ry);
        x += s * rx;
        y += s * ry;
        t /= 4;
        s *= 2;
    }
    Ok(Cell::new(x as u32, y as u32))
}

/// Maximal runs of consecutive Hilbert values covering the cells of `rect`,
/// found by descending the curve's aligned quadrants.
pub fn cell_rect_intervals(rect: &CellRect, grid: &GridSpec) -> Vec<(u64, u64)> {
    let mut out: Vec<(u64, u64)> = Vec::new();
    descend(rect, grid, 0, grid.order as u32, &mut out);
    out
}

fn descend(rect: &CellRect, grid: &GridSpec, start: u64, level: u32, out: &mut Vec<(u64, u64)>) {
    let len = 1u64 << (2 * level);
    let anchor = hilbert_decode(HilbertValue(start), grid).expect("start is in range");
    let size = 1u32 << level;
    let x0 = anchor.x & !(size - 1);
    let y0 = anchor.y & !(size - 1);
    let (x1, y1) = (x0 + size - 1, y0 + size - 1);
    if x1 < rect.x0 || x0 > rect.x1 || y1 < rect.y0 || y0 > rect.y1 {
        return;
    }
    if rect.x0 <= x0 && x1 <= rect.x1 && rect.y0 <= y0 && y1 <= rect.y1 {
        let end = start + len - 1;
        match out.last_mut() {
            Some(last) if last.1 + 1 == start => last.1 = end,
            _ => out.push((start, end)),
        }
        return;
    }
    let quarter = len / 4;
    for k in 0..4 {
        descend(rect, grid, start + k * quarter, level - 1, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn grid(order: u8) -> GridSpec {
        GridSpec::unit(order).unwrap()
    }

    #[test]
    fn bijection_at_order_3() {
        let g = grid(3);
        let mut cells = BTreeSet::new();
        for v in 0..64 {
            let c = hilbert_decode(HilbertValue(v), &g).unwrap();
            assert_eq!(hilbert_encode(c, &g).unwrap(), HilbertValue(v));
            cells.insert(c);
        }
        assert_eq!(cells.len(), 64);
    }

    #[test]
    fn consecutive_values_are_grid_neighbours() {
        for order in 1..=5 {
            let g = grid(order);
            for v in 1..g.cell_count() {
                let a = hilbert_decode(HilbertValue(v - 1), &g).unwrap();
                let b = hilbert_decode(HilbertValue(v), &g).unwrap();
                assert_eq!(a.x.abs_diff(b.x) + a.y.abs_diff(b.y), 1, "v = {v}");
            }
        }
    }

    #[test]
    fn orientation_is_pinned() {
        let g = grid(3);
        assert_eq!(hilbert_decode(HilbertValue(0), &g).unwrap(), Cell::new(0, 0));
        assert_eq!(hilbert_decode(HilbertValue(63), &g).unwrap(), Cell::new(7, 0));
        // the cell holding 20 sits between the cells of 19 and 21
        let c20 = hilbert_decode(HilbertValue(20), &g).unwrap();
        assert_eq!(c20, Cell::new(0, 6));
        let c19 = hilbert_decode(HilbertValue(19), &g).unwrap();
        let c21 = hilbert_decode(HilbertValue(21), &g).unwrap();
        assert_eq!(c19.x.abs_diff(c20.x) + c19.y.abs_diff(c20.y), 1);
        assert_eq!(c21.x.abs_diff(c20.x) + c21.y.abs_diff(c20.y), 1);
    }

    #[test]
    fn out_of_range_inputs() {
        let g = grid(3);
        assert!(hilbert_decode(HilbertValue(64), &g).is_err());
        assert!(hilbert_encode(Cell::new(8, 0), &g).is_err());
    }

    #[test]
    fn large_order_round_trip() {
        let g = grid(16);
        for &(x, y) in &[(0u32, 0u32), (65535, 0), (12345, 54321), (65535, 65535)] {
            let v = hilbert_encode(Cell::new(x, y), &g).unwrap();
            assert_eq!(hilbert_decode(v, &g).unwrap(), Cell::new(x, y));
        }
    }

    #[test]
    fn rect_intervals_match_cell_enumeration() {
        let g = grid(3);
        for x0 in 0..8u32 {
            for y0 in 0..8u32 {
                for (w, h) in [(3u32, 2u32), (2, 3), (1, 1), (8, 8), (4, 4), (5, 1)] {
                    let rect = CellRect {
                        x0,
                        y0,
                        x1: (x0 + w - 1).min(7),
                        y1: (y0 + h - 1).min(7),
                    };
                    let mut values: Vec<u64> = (0..64)
                        .filter(|&v| rect.contains(hilbert_decode(HilbertValue(v), &g).unwrap()))
                        .collect();
                    values.sort_unstable();
                    let mut oracle: Vec<(u64, u64)> = Vec::new();
                    for v in values {
                        match oracle.last_mut() {
                            Some(last) if last.1 + 1 == v => last.1 = v,
                            _ => oracle.push((v, v)),
                        }
                    }
                    assert_eq!(cell_rect_intervals(&rect, &g), oracle, "{rect:?}");
                }
            }
        }
    }
}
