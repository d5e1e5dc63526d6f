use alloc::vec;
use alloc::vec::Vec;

use qrseal_wire::EcLevel;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::*;
use crate::payload::{frame, parse_conventional, ConcealedBlob};

// Published byte-mode capacity and data codeword counts, versions 1-10, L/M/Q/H.
#[rustfmt::skip]
const BYTE_CAPACITY: [[usize; 4]; 10] = [
    [17, 14, 11, 7], [32, 26, 20, 14], [53, 42, 32, 24], [78, 62, 46, 34], [106, 84, 60, 44],
    [134, 106, 74, 58], [154, 122, 86, 64], [192, 152, 108, 84], [230, 180, 130, 98], [271, 213, 151, 119],
];
#[rustfmt::skip]
const DATA_CODEWORDS: [[usize; 4]; 10] = [
    [19, 16, 13, 9], [34, 28, 22, 16], [55, 44, 34, 26], [80, 64, 48, 36], [108, 86, 62, 46],
    [136, 108, 76, 60], [156, 124, 88, 66], [194, 154, 110, 86], [232, 182, 132, 100], [274, 216, 154, 122],
];

fn random_bytes(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    let mut v = vec![0u8; n];
    rng.fill_bytes(&mut v);
    v
}

#[test]
fn capacities_match_published_tables() {
    for v in 1..=10u8 {
        for (i, ec) in EcLevel::ALL.into_iter().enumerate() {
            assert_eq!(tables::data_codewords(v, ec), DATA_CODEWORDS[v as usize - 1][i]);
            assert_eq!(tables::byte_capacity(v, ec), BYTE_CAPACITY[v as usize - 1][i]);
            let s = BlockStructure::for_symbol(v, ec);
            assert_eq!(s.total(), tables::total_codewords(v));
            assert_eq!(s.data_total(), DATA_CODEWORDS[v as usize - 1][i]);
        }
    }
}

#[test]
fn version_choice() {
    assert_eq!(choose_version(17, EcLevel::L), Ok(1));
    assert_eq!(choose_version(18, EcLevel::L), Ok(2));
    assert_eq!(choose_version(0, EcLevel::H), Ok(1));
    assert_eq!(choose_version(119, EcLevel::H), Ok(10));
    assert!(matches!(choose_version(120, EcLevel::H), Err(QrError::PayloadTooLarge { .. })));
    assert!(matches!(choose_version(1000, EcLevel::H), Err(QrError::PayloadTooLarge { .. })));
}

#[test]
fn interleave_is_inverted_by_deinterleave() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for v in 1..=10u8 {
        for ec in EcLevel::ALL {
            let s = BlockStructure::for_symbol(v, ec);
            let stream = random_bytes(&mut rng, s.total());
            let blocks = s.deinterleave(&stream);
            assert_eq!(s.interleave(&blocks), stream);
            // Short blocks come first and differ by at most one codeword.
            let lens = &s.data_lens;
            assert!(lens.windows(2).all(|w| w[0] <= w[1] && w[1] - w[0] <= 1));
        }
    }
}

#[test]
fn codeword_frame_splits_data_and_parity() {
    let s = BlockStructure::for_symbol(5, EcLevel::Q);
    let data: Vec<u8> = (0..s.data_total() as u32).map(|i| i as u8).collect();
    let f = CodewordFrame::build(s.clone(), &data);
    assert_eq!(f.data_codewords(), data);
    assert_eq!(f.ecc_codewords().len(), s.ecc_len * s.data_lens.len());
    assert_eq!(f.blocks.len(), 4);
}

#[test]
fn roundtrip_every_version_and_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for v in 1..=10u8 {
        for ec in EcLevel::ALL {
            for len in [0, 1, tables::byte_capacity(v, ec) / 2, tables::byte_capacity(v, ec)] {
                let payload = random_bytes(&mut rng, len);
                let sym = encode_with(&payload, ec, EncodeOptions { version: Some(v), mask: None }).unwrap();
                assert_eq!(sym.side(), 4 * v as usize + 17);
                assert_eq!(decode_symbol(&sym.modules).unwrap().as_bytes(), payload.as_slice());
            }
        }
    }
}

#[test]
fn forced_mask_is_self_described() {
    for mask in 0..8u8 {
        for ec in EcLevel::ALL {
            let sym =
                encode_with(b"mask test", ec, EncodeOptions { version: Some(3), mask: Some(mask) }).unwrap();
            let info = read_format_info(&sym.modules).unwrap();
            assert_eq!((info.ec_level, info.mask, info.corrected_bits), (ec, mask, 0));
            assert_eq!(decode_symbol(&sym.modules).unwrap().as_bytes(), b"mask test");
        }
    }
    assert_eq!(
        encode_with(b"x", EcLevel::L, EncodeOptions { version: None, mask: Some(8) }),
        Err(QrError::InvalidMask(8))
    );
    assert_eq!(
        encode_with(b"x", EcLevel::L, EncodeOptions { version: Some(11), mask: None }),
        Err(QrError::InvalidVersion(11))
    );
}

#[test]
fn hello_world_scans_conventionally() {
    let blob = ConcealedBlob::from_bytes(vec![0x9A, 0xF3, 0x1B, 0x02, 0x44]);
    let payload = frame("Hello World!", &blob).unwrap();
    let sym = encode_symbol(&payload, EcLevel::Q, None).unwrap();
    let decoded = decode_symbol(&sym.modules).unwrap();
    assert_eq!(decoded, payload);
    assert_eq!(parse_conventional(decoded.as_bytes()).text, "Hello World!");
}

#[test]
fn version_info_is_written_from_version_seven() {
    let sym = encode_with(b"v7", EcLevel::M, EncodeOptions { version: Some(7), mask: None }).unwrap();
    let side = sym.side();
    let word = version_word(7);
    for i in 0..18 {
        let bit = word >> i & 1 == 1;
        assert_eq!(sym.modules.get(side - 11 + i % 3, i / 3), bit);
        assert_eq!(sym.modules.get(i / 3, side - 11 + i % 3), bit);
    }
}

#[test]
fn encoding_is_deterministic() {
    let a = encode_with(b"same input", EcLevel::H, EncodeOptions::default()).unwrap();
    let b = encode_with(b"same input", EcLevel::H, EncodeOptions::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_file().to_text(), b.to_file().to_text());
}

fn flip_codeword(sym: &mut QrSymbol, stream_index: usize, pattern: u8) {
    let layout = FunctionLayout::new(sym.version);
    let modules = layout.codeword_modules()[stream_index];
    for (bit, (x, y)) in modules.into_iter().enumerate() {
        if pattern >> (7 - bit) & 1 == 1 {
            sym.modules.flip(x, y);
        }
    }
}

#[test]
fn corrects_half_the_parity_in_every_block() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for v in 1..=10u8 {
        for ec in EcLevel::ALL {
            let payload = random_bytes(&mut rng, tables::byte_capacity(v, ec));
            let mut sym = encode_with(&payload, ec, EncodeOptions { version: Some(v), mask: None }).unwrap();
            let s = BlockStructure::for_symbol(v, ec);
            for (b, &len) in s.data_lens.iter().enumerate() {
                let mut chosen = alloc::collections::BTreeSet::new();
                while chosen.len() < s.ecc_len / 2 {
                    chosen.insert(rng.next_u32() as usize % (len + s.ecc_len));
                }
                for i in chosen {
                    let pos = s.stream_position(b, i).unwrap();
                    flip_codeword(&mut sym, pos, 1 + (rng.next_u32() % 255) as u8);
                }
            }
            assert_eq!(decode_symbol(&sym.modules).unwrap().as_bytes(), payload.as_slice(), "v{v} {ec}");
        }
    }
}

#[test]
fn one_block_past_the_bound_fails() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let payload = random_bytes(&mut rng, 40);
    let clean = encode_with(&payload, EcLevel::M, EncodeOptions { version: Some(4), mask: None }).unwrap();
    let s = BlockStructure::for_symbol(4, EcLevel::M);
    let mut sym = clean.clone();
    for i in 0..s.ecc_len {
        let pos = s.stream_position(1, i).unwrap();
        flip_codeword(&mut sym, pos, 0xFF);
    }
    match decode_symbol(&sym.modules) {
        Err(QrError::DecodeFailure { block }) => assert_eq!(block, 1),
        Ok(p) => assert_ne!(p.as_bytes(), payload.as_slice()),
        Err(e) => panic!("{e:?}"),
    }
}

#[test]
fn format_info_from_either_copy() {
    let sym = encode_with(b"format", EcLevel::H, EncodeOptions { version: Some(2), mask: Some(5) }).unwrap();
    let positions = layout::format_positions(sym.side());

    let mut first_gone = sym.clone();
    for &(x, y) in &positions[0] {
        first_gone.modules.flip(x, y);
    }
    assert_eq!(decode_symbol(&first_gone.modules).unwrap().as_bytes(), b"format");

    let mut second_gone = sym.clone();
    for &(x, y) in positions[1].iter().take(7) {
        second_gone.modules.flip(x, y);
    }
    assert_eq!(read_format_info(&second_gone.modules).unwrap().mask, 5);

    let mut both_gone = first_gone;
    for &(x, y) in positions[1].iter().take(7) {
        both_gone.modules.flip(x, y);
    }
    // Wipe far enough that no valid word is within three bits of either copy.
    for &(x, y) in positions.iter().flatten() {
        both_gone.modules.set(x, y, (x + 2 * y) % 3 == 0);
    }
    let words = layout::read_format(&both_gone.modules);
    let near = words.iter().any(|&w| decode_format_word(w).2 <= 3);
    if !near {
        assert_eq!(decode_symbol(&both_gone.modules), Err(QrError::FormatInfoError));
    }
}

#[test]
fn rejects_unsupported_sides() {
    for side in [0, 20, 22, 61, 65] {
        assert_eq!(decode_symbol(&Matrix::new(side)), Err(QrError::InvalidSize(side)));
    }
}

#[test]
fn symbol_file_conversion() {
    let sym = encode_with(b"file", EcLevel::L, EncodeOptions::default()).unwrap();
    let text = sym.to_file().to_text();
    let back = QrSymbol::from_file(qrseal_wire::SymbolFile::parse(&text).unwrap()).unwrap();
    assert_eq!(back, sym);
}

// ---- penalty oracle ----

fn grid(m: &Matrix) -> Vec<Vec<bool>> {
    (0..m.side()).map(|y| (0..m.side()).map(|x| m.get(x, y)).collect()).collect()
}

fn oracle_penalty(m: &Matrix) -> u32 {
    let g = grid(m);
    let n = g.len();
    let rows: Vec<Vec<bool>> = g.clone();
    let cols: Vec<Vec<bool>> = (0..n).map(|x| (0..n).map(|y| g[y][x]).collect()).collect();
    let mut score = 0u32;
    for line in rows.iter().chain(cols.iter()) {
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j < n && line[j] == line[i] {
                j += 1;
            }
            let run = (j - i) as u32;
            if run >= 5 {
                score += 3 + run - 5;
            }
            i = j;
        }
        let a = [true, false, true, true, true, false, true, false, false, false, false];
        let b = [false, false, false, false, true, false, true, true, true, false, true];
        for start in 0..n.saturating_sub(10) {
            let w = &line[start..start + 11];
            if w == a || w == b {
                score += 40;
            }
        }
    }
    for y in 0..n - 1 {
        for x in 0..n - 1 {
            let c = g[y][x];
            if g[y][x + 1] == c && g[y + 1][x] == c && g[y + 1][x + 1] == c {
                score += 3;
            }
        }
    }
    let total = (n * n) as i64;
    let dark = g.iter().flatten().filter(|&&d| d).count() as i64;
    let dev = (100 * dark - 50 * total).abs();
    let mut k = 0;
    while 5 * (k + 1) * total <= dev {
        k += 1;
    }
    score + 10 * k as u32
}

fn oracle_select(c: &[Matrix; 8]) -> u8 {
    let scores: Vec<u32> = c.iter().map(oracle_penalty).collect();
    let min = *scores.iter().min().unwrap();
    scores.iter().position(|&s| s == min).unwrap() as u8
}

fn random_matrix(rng: &mut ChaCha8Rng, side: usize) -> Matrix {
    Matrix::from_cells(side, (0..side * side).map(|_| rng.next_u32() & 1 == 1).collect())
}

#[test]
fn penalty_agrees_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..100 {
        let side = 21 + 4 * (i % 10);
        let m = random_matrix(&mut rng, side);
        assert_eq!(penalty(&m), oracle_penalty(&m));
        let candidates: [Matrix; 8] = core::array::from_fn(|_| random_matrix(&mut rng, side));
        assert_eq!(select_mask(&candidates), oracle_select(&candidates));
    }
}

#[test]
fn encoder_mask_matches_oracle_choice() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..40u8 {
        let v = 1 + i % 10;
        let ec = EcLevel::ALL[(i % 4) as usize];
        let payload = random_bytes(&mut rng, tables::byte_capacity(v, ec) / 3);
        let opts = |mask| EncodeOptions { version: Some(v), mask };
        let candidates: [Matrix; 8] =
            core::array::from_fn(|m| encode_with(&payload, ec, opts(Some(m as u8))).unwrap().modules);
        let auto = encode_with(&payload, ec, opts(None)).unwrap();
        assert_eq!(auto.mask, oracle_select(&candidates));
        assert_eq!(auto.modules, candidates[auto.mask as usize]);
    }
}

#[test]
fn tie_goes_to_mask_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let m = random_matrix(&mut rng, 25);
    let same: [Matrix; 8] = core::array::from_fn(|_| m.clone());
    assert_eq!(select_mask(&same), 0);
}

#[test]
fn long_run_under_mask_zero_is_avoided() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut candidates: [Matrix; 8] = core::array::from_fn(|_| random_matrix(&mut rng, 29));
    for x in 0..29 {
        for y in 0..4 {
            candidates[0].set(x, y, true);
        }
    }
    let expected = oracle_select(&candidates);
    assert_ne!(expected, 0);
    assert_eq!(select_mask(&candidates), expected);
}
