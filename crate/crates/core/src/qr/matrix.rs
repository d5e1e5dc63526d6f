use alloc::vec;
use alloc::vec::Vec;

/// A square grid of modules, row-major, `true` = dark.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    side: usize,
    cells: Vec<bool>,
}

impl Matrix {
    pub fn new(side: usize) -> Self {
        Self { side, cells: vec![false; side * side] }
    }

    /// Panics if `cells.len() != side * side`.
    pub fn from_cells(side: usize, cells: Vec<bool>) -> Self {
        assert_eq!(cells.len(), side * side, "cell count does not match side");
        Self { side, cells }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<bool> {
        self.cells
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.cells[y * self.side + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, dark: bool) {
        self.cells[y * self.side + x] = dark;
    }

    #[inline]
    pub fn flip(&mut self, x: usize, y: usize) {
        let c = &mut self.cells[y * self.side + x];
        *c = !*c;
    }

    pub fn dark_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Rows packed into bitmasks, bit `x` = column `x`. Sides up to 64.
    pub(crate) fn row_bits(&self) -> Vec<u64> {
        (0..self.side)
            .map(|y| (0..self.side).fold(0u64, |acc, x| acc | (self.get(x, y) as u64) << x))
            .collect()
    }

    pub(crate) fn column_bits(&self) -> Vec<u64> {
        (0..self.side)
            .map(|x| (0..self.side).fold(0u64, |acc, y| acc | (self.get(x, y) as u64) << y))
            .collect()
    }
}
