//! Uniform cell grids on rectangles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `nx × ny` cells on `[x_min, x_max] × [y_min, y_max]`; cell `(ix, iy)` has
/// flat index `iy * nx + ix` (row-major, rows along `y`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, x: [f64; 2], y: [f64; 2]) -> Result<Self> {
        let g = Self {
            nx,
            ny,
            x_min: x[0],
            x_max: x[1],
            y_min: y[0],
            y_max: y[1],
        };
        g.validate()?;
        Ok(g)
    }

    /// `n × n` cells on `[-half, half]²`.
    pub fn square(n: usize, half: f64) -> Result<Self> {
        Self::new(n, n, [-half, half], [-half, half])
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if self.nx == 0 || self.ny == 0 || !finite || self.x_max <= self.x_min || self.y_max <= self.y_min
        {
            return Err(Error::Validation(format!("degenerate grid {self:?}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    /// Largest side of the domain.
    pub fn extent(&self) -> f64 {
        (self.x_max - self.x_min).max(self.y_max - self.y_min)
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn cell_bounds(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        let (ix, iy) = (i % self.nx, i / self.nx);
        let x0 = self.x_min + self.dx() * ix as f64;
        let y0 = self.y_min + self.dy() * iy as f64;
        ([x0, x0 + self.dx()], [y0, y0 + self.dy()])
    }

    pub fn cell_center(&self, i: usize) -> [f64; 2] {
        let (x, y) = self.cell_bounds(i);
        [0.5 * (x[0] + x[1]), 0.5 * (y[0] + y[1])]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (self.x_min..=self.x_max).contains(&p[0]) && (self.y_min..=self.y_max).contains(&p[1])
    }

    /// Cell containing `p`; points on the upper edges belong to the last cell.
    pub fn cell_of(&self, p: [f64; 2]) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let ix = (((p[0] - self.x_min) / self.dx()) as usize).min(self.nx - 1);
        let iy = (((p[1] - self.y_min) / self.dy()) as usize).min(self.ny - 1);
        Some(self.index(ix, iy))
    }

    /// Range of cell columns and rows whose cells meet the square
    /// `[c - r, c + r]²`.
    pub fn cells_near(&self, c: [f64; 2], r: f64) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let span = |lo: f64, hi: f64, min: f64, d: f64, n: usize| {
            let a = ((lo - min) / d).floor().max(0.0) as usize;
            let b = (((hi - min) / d).floor() + 1.0).clamp(0.0, n as f64) as usize;
            a.min(n)..b
        };
        (
            span(c[0] - r, c[0] + r, self.x_min, self.dx(), self.nx),
            span(c[1] - r, c[1] + r, self.y_min, self.dy(), self.ny),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_and_lookup() {
        let g = Grid::new(4, 2, [0.0, 2.0], [0.0, 1.0]).unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g.cell_area(), 0.25);
        assert_eq!(g.cell_of([1.2, 0.7]), Some(g.index(2, 1)));
        assert_eq!(g.cell_of([2.0, 1.0]), Some(7));
        assert_eq!(g.cell_of([2.1, 0.0]), None);
        assert_eq!(g.cell_center(5), [0.75, 0.75]);
        assert!(Grid::new(0, 1, [0.0, 1.0], [0.0, 1.0]).is_err());
    }

    #[test]
    fn neighborhood_ranges() {
        let g = Grid::square(10, 1.0).unwrap();
        let (xs, ys) = g.cells_near([0.0, 0.0], 0.15);
        assert_eq!(xs, 4..6);
        assert_eq!(ys, 4..6);
        let (xs, _) = g.cells_near([5.0, 0.0], 0.1);
        assert!(xs.is_empty());
    }
}
