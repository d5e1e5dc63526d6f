//! Data masks and the penalty score used to pick one.

use super::layout::FunctionLayout;
use super::matrix::Matrix;

pub const PENALTY_N1: u32 = 3;
pub const PENALTY_N2: u32 = 3;
pub const PENALTY_N3: u32 = 40;
pub const PENALTY_N4: u32 = 10;

/// Whether mask `id` inverts module `(x, y)`.
#[inline]
pub fn mask_bit(id: u8, x: usize, y: usize) -> bool {
    match id {
        0 => (x + y).is_multiple_of(2),
        1 => y.is_multiple_of(2),
        2 => x.is_multiple_of(3),
        3 => (x + y).is_multiple_of(3),
        4 => (x / 3 + y / 2).is_multiple_of(2),
        5 => x * y % 2 + x * y % 3 == 0,
        6 => (x * y % 2 + x * y % 3).is_multiple_of(2),
        7 => ((x + y) % 2 + x * y % 3).is_multiple_of(2),
        _ => panic!("mask id {id} out of range"),
    }
}

/// XORs the mask over every non-function module. Self-inverse.
pub fn apply_mask(m: &mut Matrix, layout: &FunctionLayout, id: u8) {
    let side = m.side();
    for y in 0..side {
        for x in 0..side {
            if !layout.is_function(x, y) && mask_bit(id, x, y) {
                m.flip(x, y);
            }
        }
    }
}

/// Dark-light finder-like sequence 1:1:3:1:1 followed by four light
/// modules, bit `k` = module `k` of the window.
const FINDER_THEN_LIGHT: u64 = 0b000_0101_1101;
const LIGHT_THEN_FINDER: u64 = 0b101_1101_0000;

fn line_penalty(line: u64, len: usize) -> u32 {
    let mut score = 0;

    // N1: runs of five or more.
    let mut run = 1;
    for i in 1..len {
        if (line >> i & 1) == (line >> (i - 1) & 1) {
            run += 1;
        } else {
            if run >= 5 {
                score += PENALTY_N1 + (run - 5);
            }
            run = 1;
        }
    }
    if run >= 5 {
        score += PENALTY_N1 + (run - 5);
    }

    // N3: finder-like windows inside the symbol.
    if len >= 11 {
        for i in 0..=len - 11 {
            let w = line >> i & 0x7FF;
            if w == FINDER_THEN_LIGHT || w == LIGHT_THEN_FINDER {
                score += PENALTY_N3;
            }
        }
    }
    score
}

/// N1 + N2 + N3 + N4 for a finished symbol.
pub fn penalty(m: &Matrix) -> u32 {
    let side = m.side();
    let rows = m.row_bits();
    let cols = m.column_bits();
    let full = if side == 64 { u64::MAX } else { (1u64 << side) - 1 };

    let mut score: u32 = rows.iter().chain(cols.iter()).map(|&l| line_penalty(l, side)).sum();

    // N2: 2×2 blocks of one colour, overlapping blocks counted separately.
    let pair_mask = full >> 1;
    for w in rows.windows(2) {
        let (a, b) = (w[0], w[1]);
        let dark = a & b & (a >> 1) & (b >> 1) & pair_mask;
        let light = !a & !b & (!a >> 1) & (!b >> 1) & pair_mask;
        score += PENALTY_N2 * (dark.count_ones() + light.count_ones());
    }

    // N4: 10 points per full 5% step away from half dark.
    let total = side * side;
    let dark = m.dark_count();
    let steps = ((dark * 2).abs_diff(total) * 10 / total) as u32;
    score + PENALTY_N4 * steps
}

/// Lowest-penalty candidate; ties go to the lower mask id.
pub fn select_mask(candidates: &[Matrix; 8]) -> u8 {
    let mut best = (u32::MAX, 0u8);
    for (id, m) in candidates.iter().enumerate() {
        let p = penalty(m);
        if p < best.0 {
            best = (p, id as u8);
        }
    }
    best.1
}
