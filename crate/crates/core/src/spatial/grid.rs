use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ORDER: u8 = 16;

/// Square grid of `2^order x 2^order` cells laid over a bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub order: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }
}

/// Axis-aligned rectangle in coordinate units, bounds inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

/// Rectangle of cells, bounds inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl CellRect {
    pub fn contains(&self, c: Cell) -> bool {
        (self.x0..=self.x1).contains(&c.x) && (self.y0..=self.y1).contains(&c.y)
    }
}

impl GridSpec {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64, order: u8) -> Result<Self> {
        if !(x_min.is_finite() && y_min.is_finite() && x_max.is_finite() && y_max.is_finite()) {
            return Err(Error::InvalidGrid("bounding box must be finite"));
        }
        if x_max <= x_min || y_max <= y_min {
            return Err(Error::InvalidGrid("bounding box is degenerate"));
        }
        if order == 0 || order > MAX_ORDER {
            return Err(Error::InvalidGrid("order must be in 1..=16"));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
            order,
        })
    }

    /// The unit square at the given order.
    pub fn unit(order: u8) -> Result<Self> {
        Self::new(0.0, 0.0, 1.0, 1.0, order)
    }

    /// Total Hilbert-value bit width `2 * order`.
    pub fn bits(&self) -> u8 {
        2 * self.order
    }

    pub fn side(&self) -> u32 {
        1u32 << self.order
    }

    pub fn cell_count(&self) -> u64 {
        1u64 << self.bits()
    }

    fn axis(&self, v: f64, lo: f64, hi: f64) -> u32 {
        let side = self.side();
        let scaled = ((v - lo) / (hi - lo) * side as f64).floor();
        (scaled.max(0.0) as u64).min(side as u64 - 1) as u32
    }

    /// Linear floor quantization; the upper box edge folds into the last cell.
    pub fn quantize(&self, x: f64, y: f64) -> Result<Cell> {
        if !(self.x_min..=self.x_max).contains(&x) || !(self.y_min..=self.y_max).contains(&y) {
            return Err(Error::OutsideBox { x, y });
        }
        Ok(Cell {
            x: self.axis(x, self.x_min, self.x_max),
            y: self.axis(y, self.y_min, self.y_max),
        })
    }

    /// Cells touched by `rect` after clipping to the box, or `None` when the
    /// rectangle misses the grid.
    pub fn cell_rect(&self, rect: &Rect) -> Option<CellRect> {
        let (x1, x2) = (rect.x1.min(rect.x2), rect.x1.max(rect.x2));
        let (y1, y2) = (rect.y1.min(rect.y2), rect.y1.max(rect.y2));
        if x2 < self.x_min || x1 > self.x_max || y2 < self.y_min || y1 > self.y_max {
            return None;
        }
        let lo = self
            .quantize(x1.max(self.x_min), y1.max(self.y_min))
            .ok()?;
        let hi = self
            .quantize(x2.min(self.x_max), y2.min(self.y_max))
            .ok()?;
        Some(CellRect {
            x0: lo.x,
            y0: lo.y,
            x1: hi.x,
            y1: hi.y,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_corners() {
        let g = GridSpec::new(-10.0, 5.0, 30.0, 45.0, 3).unwrap();
        assert_eq!(g.quantize(-10.0, 5.0).unwrap(), Cell::new(0, 0));
        assert_eq!(g.quantize(30.0, 45.0).unwrap(), Cell::new(7, 7));
        assert_eq!(g.bits(), 6);
        assert_eq!(g.cell_count(), 64);
    }

    #[test]
    fn midpoint_follows_floor_oracle() {
        let g = GridSpec::new(0.0, 0.0, 8.0, 8.0, 3).unwrap();
        // (4.0, 4.0) on an 8x8 grid of unit cells: floor(4.0) = 4.
        assert_eq!(g.quantize(4.0, 4.0).unwrap(), Cell::new(4, 4));
        assert_eq!(g.quantize(3.999, 0.5).unwrap(), Cell::new(3, 0));
        for i in 0..80 {
            let v = i as f64 * 0.1;
            let expect = (v.floor() as u32).min(7);
            assert_eq!(g.quantize(v, v).unwrap(), Cell::new(expect, expect));
        }
    }

    #[test]
    fn rejects_points_outside_and_bad_grids() {
        let g = GridSpec::unit(3).unwrap();
        assert!(matches!(g.quantize(1.5, 0.5), Err(Error::OutsideBox { .. })));
        assert!(g.quantize(0.5, -0.01).is_err());
        assert!(GridSpec::new(0.0, 0.0, 0.0, 1.0, 3).is_err());
        assert!(GridSpec::new(0.0, 0.0, 1.0, 1.0, 0).is_err());
        assert!(GridSpec::new(0.0, 0.0, 1.0, 1.0, 17).is_err());
        assert!(GridSpec::new(0.0, 0.0, f64::NAN, 1.0, 3).is_err());
    }

    #[test]
    fn rect_clipping() {
        let g = GridSpec::new(0.0, 0.0, 8.0, 8.0, 3).unwrap();
        let r = g
            .cell_rect(&Rect { x1: -5.0, y1: 2.5, x2: 3.2, y2: 100.0 })
            .unwrap();
        assert_eq!(r, CellRect { x0: 0, y0: 2, x1: 3, y1: 7 });
        assert!(g.cell_rect(&Rect { x1: 9.0, y1: 0.0, x2: 10.0, y2: 1.0 }).is_none());
    }
}
