//! Block structure for versions 1-10.

use qrseal_wire::EcLevel;

pub const MIN_VERSION: u8 = 1;
pub const MAX_VERSION: u8 = 10;

const fn ec_index(ec: EcLevel) -> usize {
    match ec {
        EcLevel::L => 0,
        EcLevel::M => 1,
        EcLevel::Q => 2,
        EcLevel::H => 3,
    }
}

#[rustfmt::skip]
const ECC_PER_BLOCK: [[u8; 10]; 4] = [
    [ 7, 10, 15, 20, 26, 18, 20, 24, 30, 18],
    [10, 16, 26, 18, 24, 16, 18, 22, 22, 26],
    [13, 22, 18, 26, 18, 24, 18, 22, 20, 24],
    [17, 28, 22, 16, 22, 28, 26, 26, 24, 28],
];

#[rustfmt::skip]
const NUM_BLOCKS: [[u8; 10]; 4] = [
    [1, 1, 1, 1, 1, 2, 2, 2, 2, 4],
    [1, 1, 1, 2, 2, 4, 4, 4, 5, 5],
    [1, 1, 2, 2, 4, 4, 6, 6, 8, 8],
    [1, 1, 2, 4, 4, 4, 5, 6, 8, 8],
];

#[rustfmt::skip]
const ALIGNMENT: [&[usize]; 10] = [
    &[],
    &[6, 18],
    &[6, 22],
    &[6, 26],
    &[6, 30],
    &[6, 34],
    &[6, 22, 38],
    &[6, 24, 42],
    &[6, 26, 46],
    &[6, 28, 50],
];

pub fn side(version: u8) -> usize {
    4 * version as usize + 17
}

pub fn version_for_side(side: usize) -> Option<u8> {
    if side < 21 || !(side - 17).is_multiple_of(4) {
        return None;
    }
    let v = (side - 17) / 4;
    (v <= MAX_VERSION as usize).then_some(v as u8)
}

pub fn alignment_centers(version: u8) -> &'static [usize] {
    ALIGNMENT[version as usize - 1]
}

pub fn ecc_per_block(version: u8, ec: EcLevel) -> usize {
    ECC_PER_BLOCK[ec_index(ec)][version as usize - 1] as usize
}

pub fn num_blocks(version: u8, ec: EcLevel) -> usize {
    NUM_BLOCKS[ec_index(ec)][version as usize - 1] as usize
}

/// Modules left for codewords once every function pattern is placed.
pub fn raw_data_modules(version: u8) -> usize {
    let v = version as usize;
    let mut n = (16 * v + 128) * v + 64;
    if v >= 2 {
        let align = v / 7 + 2;
        n -= (25 * align - 10) * align - 55;
        if v >= 7 {
            n -= 36;
        }
    }
    n
}

pub fn total_codewords(version: u8) -> usize {
    raw_data_modules(version) / 8
}

pub fn data_codewords(version: u8, ec: EcLevel) -> usize {
    total_codewords(version) - ecc_per_block(version, ec) * num_blocks(version, ec)
}

pub fn count_bits(version: u8) -> usize {
    if version <= 9 {
        8
    } else {
        16
    }
}

/// Longest byte-mode payload that fits.
pub fn byte_capacity(version: u8, ec: EcLevel) -> usize {
    (data_codewords(version, ec) * 8 - 4 - count_bits(version)) / 8
}
