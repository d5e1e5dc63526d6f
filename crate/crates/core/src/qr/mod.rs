//! QR symbol encoder and decoder, versions 1-10, byte mode only.
//!
//! The decoder works on clean module matrices rather than photographs:
//! print and capture damage is modelled upstream as flipped modules.

mod bits;
mod frame;
mod layout;
mod mask;
mod matrix;
pub mod tables;

use alloc::vec::Vec;

use qrseal_wire::{EcLevel, SymbolFile};

pub use frame::{BlockStructure, CodewordFrame};
pub use layout::{decode_format_word, format_word, version_word, FunctionLayout};
pub use mask::{apply_mask, mask_bit, penalty, select_mask};
pub use matrix::Matrix;

use crate::payload::QrPayload;
use crate::rs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum QrError {
    #[error("payload of {len} bytes exceeds the version {max_version} capacity at this level")]
    PayloadTooLarge { len: usize, max_version: u8 },
    #[error("version {0} outside 1-10")]
    InvalidVersion(u8),
    #[error("mask id {0} outside 0-7")]
    InvalidMask(u8),
    #[error("matrix side {0} matches no supported version")]
    InvalidSize(usize),
    #[error("format information unreadable in both copies")]
    FormatInfoError,
    #[error("block {block} has more errors than it can correct")]
    DecodeFailure { block: usize },
    #[error("segment runs past the end of the data codewords")]
    MalformedSegment,
    #[error("unsupported segment mode {0:#06b}")]
    UnsupportedMode(u8),
}

/// A finished symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QrSymbol {
    pub version: u8,
    pub ec_level: EcLevel,
    pub mask: u8,
    pub modules: Matrix,
}

impl QrSymbol {
    pub fn side(&self) -> usize {
        self.modules.side()
    }

    pub fn to_file(&self) -> SymbolFile {
        SymbolFile {
            version: self.version,
            ec: self.ec_level,
            mask: self.mask,
            side: self.side(),
            modules: self.modules.cells().to_vec(),
        }
    }

    /// Takes the header at face value; the decoder never trusts it.
    pub fn from_file(file: SymbolFile) -> Result<Self, QrError> {
        let version = tables::version_for_side(file.side).ok_or(QrError::InvalidSize(file.side))?;
        Ok(Self {
            version,
            ec_level: file.ec,
            mask: file.mask,
            modules: Matrix::from_cells(file.side, file.modules),
        })
    }
}

/// Smallest version whose byte-mode capacity holds `payload_len`.
pub fn choose_version(payload_len: usize, ec: EcLevel) -> Result<u8, QrError> {
    (tables::MIN_VERSION..=tables::MAX_VERSION)
        .find(|&v| tables::byte_capacity(v, ec) >= payload_len)
        .ok_or(QrError::PayloadTooLarge { len: payload_len, max_version: tables::MAX_VERSION })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EncodeOptions {
    pub version: Option<u8>,
    pub mask: Option<u8>,
}

pub fn encode_symbol(payload: &QrPayload, ec: EcLevel, version: Option<u8>) -> Result<QrSymbol, QrError> {
    encode_with(payload.as_bytes(), ec, EncodeOptions { version, mask: None })
}

pub fn encode_with(payload: &[u8], ec: EcLevel, opts: EncodeOptions) -> Result<QrSymbol, QrError> {
    let version = match opts.version {
        Some(v) if !(tables::MIN_VERSION..=tables::MAX_VERSION).contains(&v) => {
            return Err(QrError::InvalidVersion(v))
        }
        Some(v) if tables::byte_capacity(v, ec) < payload.len() => {
            return Err(QrError::PayloadTooLarge { len: payload.len(), max_version: v })
        }
        Some(v) => v,
        None => choose_version(payload.len(), ec)?,
    };
    if let Some(m) = opts.mask.filter(|&m| m > 7) {
        return Err(QrError::InvalidMask(m));
    }

    let structure = BlockStructure::for_symbol(version, ec);
    let data = bits::encode_data(payload, version, structure.data_total());
    let stream = CodewordFrame::build(structure, &data).interleaved();

    let layout = FunctionLayout::new(version);
    let mut unmasked = layout.base.clone();
    let path = layout.data_path();
    for (i, &(x, y)) in path.iter().enumerate() {
        // Remainder bits past the last codeword stay light.
        let dark = stream.get(i / 8).is_some_and(|&b| b >> (7 - i % 8) & 1 == 1);
        unmasked.set(x, y, dark);
    }

    let masked = |id: u8| {
        let mut m = unmasked.clone();
        apply_mask(&mut m, &layout, id);
        layout::write_format(&mut m, ec, id);
        m
    };
    let (mask, modules) = match opts.mask {
        Some(id) => (id, masked(id)),
        None => {
            let candidates: [Matrix; 8] = core::array::from_fn(|id| masked(id as u8));
            let id = select_mask(&candidates);
            (id, candidates[id as usize].clone())
        }
    };
    Ok(QrSymbol { version, ec_level: ec, mask, modules })
}

/// What the decoder read from the format area.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormatInfo {
    pub ec_level: EcLevel,
    pub mask: u8,
    pub corrected_bits: u32,
}

const MAX_FORMAT_CORRECTION: u32 = 3;

/// Readable format copies, fewest corrected bits first, duplicates removed.
pub fn format_candidates(m: &Matrix) -> Vec<FormatInfo> {
    let mut found: Vec<FormatInfo> = layout::read_format(m)
        .iter()
        .map(|&w| decode_format_word(w))
        .filter(|&(_, _, d)| d <= MAX_FORMAT_CORRECTION)
        .map(|(ec_level, mask, corrected_bits)| FormatInfo { ec_level, mask, corrected_bits })
        .collect();
    found.sort_by_key(|f| f.corrected_bits);
    found.dedup_by_key(|f| (f.ec_level, f.mask));
    found
}

/// The format copy needing fewer corrections.
pub fn read_format_info(m: &Matrix) -> Result<FormatInfo, QrError> {
    format_candidates(m).first().copied().ok_or(QrError::FormatInfoError)
}

/// Raw interleaved codewords read off the matrix, mask removed.
pub fn read_codewords(m: &Matrix, version: u8, mask: u8) -> Vec<u8> {
    let layout = FunctionLayout::new(version);
    let path = layout.data_path();
    let total = tables::total_codewords(version);
    let mut out = alloc::vec![0u8; total];
    for (i, &(x, y)) in path.iter().take(total * 8).enumerate() {
        let bit = m.get(x, y) ^ mask_bit(mask, x, y);
        out[i / 8] |= (bit as u8) << (7 - i % 8);
    }
    out
}

pub fn decode_symbol(m: &Matrix) -> Result<QrPayload, QrError> {
    let version = tables::version_for_side(m.side()).ok_or(QrError::InvalidSize(m.side()))?;
    let candidates = format_candidates(m);
    let mut first_err = QrError::FormatInfoError;
    // Two copies that read cleanly but disagree are both tried.
    for (i, fmt) in candidates.iter().enumerate() {
        match decode_with_format(m, version, fmt) {
            Ok(p) => return Ok(p),
            Err(e) if i == 0 => first_err = e,
            Err(_) => {}
        }
    }
    Err(first_err)
}

fn decode_with_format(m: &Matrix, version: u8, fmt: &FormatInfo) -> Result<QrPayload, QrError> {
    let structure = BlockStructure::for_symbol(version, fmt.ec_level);
    let stream = read_codewords(m, version, fmt.mask);
    let blocks = structure.deinterleave(&stream);

    let mut data = Vec::with_capacity(structure.data_total());
    for (i, block) in blocks.iter().enumerate() {
        let fixed =
            rs::rs_correct(block, structure.ecc_len).map_err(|_| QrError::DecodeFailure { block: i })?;
        data.extend(fixed);
    }
    bits::decode_data(&data, version).map(QrPayload::from_raw)
}

#[cfg(test)]
mod tests;
