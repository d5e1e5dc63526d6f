//! Function patterns, format/version information and the codeword path.

use alloc::vec::Vec;

use qrseal_wire::EcLevel;

use super::matrix::Matrix;
use super::tables;

const FORMAT_MASK: u16 = 0x5412;
const FORMAT_GEN: u16 = 0x537;
const VERSION_GEN: u32 = 0x1F25;

/// EC level bits as they appear in format information.
pub fn ec_format_bits(ec: EcLevel) -> u16 {
    match ec {
        EcLevel::L => 0b01,
        EcLevel::M => 0b00,
        EcLevel::Q => 0b11,
        EcLevel::H => 0b10,
    }
}

fn ec_from_format_bits(bits: u16) -> EcLevel {
    match bits & 0b11 {
        0b01 => EcLevel::L,
        0b00 => EcLevel::M,
        0b11 => EcLevel::Q,
        _ => EcLevel::H,
    }
}

/// 15-bit masked BCH(15,5) format word.
pub fn format_word(ec: EcLevel, mask: u8) -> u16 {
    let data = ec_format_bits(ec) << 3 | mask as u16;
    let mut rem = data;
    for _ in 0..10 {
        rem = (rem << 1) ^ ((rem >> 9) * FORMAT_GEN);
    }
    ((data << 10) | (rem & 0x3FF)) ^ FORMAT_MASK
}

/// Nearest valid format word: `(ec, mask, differing bits)`.
pub fn decode_format_word(word: u16) -> (EcLevel, u8, u32) {
    let mut best = (EcLevel::M, 0u8, u32::MAX);
    for ec in EcLevel::ALL {
        for mask in 0..8u8 {
            let d = (format_word(ec, mask) ^ word).count_ones();
            if d < best.2 {
                best = (ec_from_format_bits(ec_format_bits(ec)), mask, d);
            }
        }
    }
    best
}

/// 18-bit BCH(18,6) version word for versions 7 and up.
pub fn version_word(version: u8) -> u32 {
    let mut rem = version as u32;
    for _ in 0..12 {
        rem = (rem << 1) ^ ((rem >> 11) * VERSION_GEN);
    }
    (version as u32) << 12 | (rem & 0xFFF)
}

/// Coordinates `(x, y)` of format bit `i` in each copy.
pub fn format_positions(side: usize) -> [[(usize, usize); 15]; 2] {
    let mut first = [(0, 0); 15];
    let mut second = [(0, 0); 15];
    for (i, p) in first.iter_mut().enumerate() {
        *p = match i {
            0..=5 => (8, i),
            6 => (8, 7),
            7 => (8, 8),
            8 => (7, 8),
            _ => (14 - i, 8),
        };
    }
    for (i, p) in second.iter_mut().enumerate() {
        *p = if i < 8 { (side - 1 - i, 8) } else { (8, side - 15 + i) };
    }
    [first, second]
}

/// The symbol skeleton for one version: which modules are function
/// modules, and the values of the fixed patterns.
#[derive(Debug, Clone)]
pub struct FunctionLayout {
    pub version: u8,
    pub base: Matrix,
    reserved: Vec<bool>,
}

impl FunctionLayout {
    pub fn new(version: u8) -> Self {
        let side = tables::side(version);
        let mut layout = Self { version, base: Matrix::new(side), reserved: alloc::vec![false; side * side] };
        layout.draw_timing();
        layout.draw_finder(3, 3);
        layout.draw_finder(side - 4, 3);
        layout.draw_finder(3, side - 4);
        layout.draw_alignment();
        for (x, y) in format_positions(side).into_iter().flatten() {
            layout.mark(x, y, false);
        }
        layout.mark(8, side - 8, true);
        if version >= 7 {
            let word = version_word(version);
            for i in 0..18 {
                let bit = word >> i & 1 == 1;
                let a = side - 11 + i % 3;
                let b = i / 3;
                layout.mark(a, b, bit);
                layout.mark(b, a, bit);
            }
        }
        layout
    }

    pub fn side(&self) -> usize {
        self.base.side()
    }

    pub fn is_function(&self, x: usize, y: usize) -> bool {
        self.reserved[y * self.side() + x]
    }

    fn mark(&mut self, x: usize, y: usize, dark: bool) {
        let side = self.side();
        self.base.set(x, y, dark);
        self.reserved[y * side + x] = true;
    }

    fn draw_timing(&mut self) {
        for i in 0..self.side() {
            self.mark(6, i, i % 2 == 0);
            self.mark(i, 6, i % 2 == 0);
        }
    }

    /// 7×7 finder plus its one-module light separator.
    fn draw_finder(&mut self, cx: usize, cy: usize) {
        let side = self.side() as isize;
        for dy in -4isize..=4 {
            for dx in -4isize..=4 {
                let (x, y) = (cx as isize + dx, cy as isize + dy);
                if (0..side).contains(&x) && (0..side).contains(&y) {
                    let dist = dx.abs().max(dy.abs());
                    self.mark(x as usize, y as usize, dist != 2 && dist != 4);
                }
            }
        }
    }

    fn draw_alignment(&mut self) {
        let centers = tables::alignment_centers(self.version);
        let n = centers.len();
        for (i, &cy) in centers.iter().enumerate() {
            for (j, &cx) in centers.iter().enumerate() {
                let overlaps_finder = (i == 0 && j == 0) || (i == 0 && j == n - 1) || (i == n - 1 && j == 0);
                if overlaps_finder {
                    continue;
                }
                for dy in -2isize..=2 {
                    for dx in -2isize..=2 {
                        let dist = dx.abs().max(dy.abs());
                        self.mark((cx as isize + dx) as usize, (cy as isize + dy) as usize, dist != 1);
                    }
                }
            }
        }
    }

    /// Data modules in placement order: two-column zigzag from the bottom
    /// right, skipping the vertical timing column.
    pub fn data_path(&self) -> Vec<(usize, usize)> {
        let side = self.side();
        let mut path = Vec::with_capacity(tables::raw_data_modules(self.version));
        let mut right = side as isize - 1;
        while right >= 1 {
            if right == 6 {
                right = 5;
            }
            let upward = (right + 1) & 2 == 0;
            for vert in 0..side {
                let y = if upward { side - 1 - vert } else { vert };
                for j in 0..2 {
                    let x = (right - j) as usize;
                    if !self.is_function(x, y) {
                        path.push((x, y));
                    }
                }
            }
            right -= 2;
        }
        path
    }

    /// Module coordinates of each codeword, in stream order, MSB first.
    pub fn codeword_modules(&self) -> Vec<[(usize, usize); 8]> {
        self.data_path()
            .chunks_exact(8)
            .map(|c| {
                let mut a = [(0, 0); 8];
                a.copy_from_slice(c);
                a
            })
            .collect()
    }
}

pub fn write_format(m: &mut Matrix, ec: EcLevel, mask: u8) {
    let word = format_word(ec, mask);
    for copy in format_positions(m.side()) {
        for (i, (x, y)) in copy.into_iter().enumerate() {
            m.set(x, y, word >> i & 1 == 1);
        }
    }
}

pub fn read_format(m: &Matrix) -> [u16; 2] {
    format_positions(m.side()).map(|copy| {
        copy.into_iter().enumerate().fold(0u16, |acc, (i, (x, y))| acc | (m.get(x, y) as u16) << i)
    })
}
