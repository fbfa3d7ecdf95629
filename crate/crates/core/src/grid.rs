//! Uniform bin index over planar points and boxes.

use std::collections::HashMap;

use crate::geo::{Bounds, PlanarPoint};

#[derive(Debug, Clone)]
pub struct GridIndex {
    cell: f64,
    bins: HashMap<(i64, i64), Vec<usize>>,
}

impl GridIndex {
    pub fn new(cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "grid cell size must be positive");
        GridIndex { cell, bins: HashMap::new() }
    }

    pub fn cell_of(&self, p: PlanarPoint) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    pub fn insert_point(&mut self, item: usize, p: PlanarPoint) {
        self.bins.entry(self.cell_of(p)).or_default().push(item);
    }

    /// Registers `item` in every bin its bounding box touches.
    pub fn insert_bounds(&mut self, item: usize, b: &Bounds) {
        let (x0, y0) = self.cell_of(PlanarPoint { x: b.min_x, y: b.min_y });
        let (x1, y1) = self.cell_of(PlanarPoint { x: b.max_x, y: b.max_y });
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                self.bins.entry((cx, cy)).or_default().push(item);
            }
        }
    }

    pub fn bin(&self, key: (i64, i64)) -> &[usize] {
        self.bins.get(&key).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Items in the 3x3 block of bins around `p`.
    pub fn around(&self, p: PlanarPoint) -> impl Iterator<Item = usize> + '_ {
        let (cx, cy) = self.cell_of(p);
        (-1..=1).flat_map(move |dx| (-1..=1).flat_map(move |dy| self.bin((cx + dx, cy + dy)).iter().copied()))
    }
}
