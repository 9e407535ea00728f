//! Regular grid over a task-space rectangle, cells numbered row-major.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::space::{Rect, TaskPoint};

/// `cols` cells along the first axis, `rows` along the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Grid<T: Scalar> {
    pub bounds: Rect<T>,
    pub cols: usize,
    pub rows: usize,
}

impl<T: Scalar> Grid<T> {
    pub fn new(bounds: Rect<T>, cols: usize, rows: usize) -> Self {
        assert!(cols > 0 && rows > 0, "grid needs at least one cell");
        Self { bounds, cols, rows }
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn bin(&self, v: T, axis: usize, n: usize) -> Option<usize> {
        let lo = self.bounds.min[axis];
        let hi = self.bounds.max[axis];
        if !(v >= lo && v <= hi) {
            return None;
        }
        let f = ((v - lo) / (hi - lo) * T::from_usize_lossy(n)).floor();
        Some(f.to_usize().unwrap_or(0).min(n - 1))
    }

    /// Cell id `row * cols + col`, or `None` outside the bounds.
    pub fn cell_of(&self, p: &TaskPoint<T>) -> Option<usize> {
        let col = self.bin(p.y1, 0, self.cols)?;
        let row = self.bin(p.y2, 1, self.rows)?;
        Some(row * self.cols + col)
    }

    pub fn cell_rect(&self, id: usize) -> Rect<T> {
        let (row, col) = (id / self.cols, id % self.cols);
        let w = self.bounds.width(0) / T::from_usize_lossy(self.cols);
        let h = self.bounds.width(1) / T::from_usize_lossy(self.rows);
        let min = [
            self.bounds.min[0] + w * T::from_usize_lossy(col),
            self.bounds.min[1] + h * T::from_usize_lossy(row),
        ];
        let max = [
            if col + 1 == self.cols {
                self.bounds.max[0]
            } else {
                min[0] + w
            },
            if row + 1 == self.rows {
                self.bounds.max[1]
            } else {
                min[1] + h
            },
        ];
        Rect { min, max }
    }

    /// Number of points per cell; points outside the bounds are ignored.
    pub fn counts<'a, I>(&self, points: I) -> Vec<usize>
    where
        I: IntoIterator<Item = &'a TaskPoint<T>>,
    {
        let mut counts = vec![0usize; self.len()];
        for p in points {
            if let Some(c) = self.cell_of(p) {
                counts[c] += 1;
            }
        }
        counts
    }
}
