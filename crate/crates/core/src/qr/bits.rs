//! Byte-mode segment bit stream.

use alloc::vec::Vec;

use super::tables;
use super::QrError;

const MODE_BYTE: u32 = 0b0100;
const MODE_TERMINATOR: u32 = 0b0000;
const PAD: [u8; 2] = [0xEC, 0x11];

#[derive(Debug, Default)]
struct BitWriter {
    bits: Vec<bool>,
}

impl BitWriter {
    fn push(&mut self, value: u32, len: usize) {
        for i in (0..len).rev() {
            self.bits.push(value >> i & 1 == 1);
        }
    }
}

/// Data codewords for a single byte-mode segment, terminated and padded to
/// `data_codewords` bytes. Caller has checked capacity.
pub fn encode_data(payload: &[u8], version: u8, data_codewords: usize) -> Vec<u8> {
    let capacity_bits = data_codewords * 8;
    let mut w = BitWriter::default();
    w.push(MODE_BYTE, 4);
    w.push(payload.len() as u32, tables::count_bits(version));
    for &b in payload {
        w.push(b as u32, 8);
    }
    let term = (capacity_bits - w.bits.len()).min(4);
    w.push(MODE_TERMINATOR, term);
    let pad_bits = (8 - w.bits.len() % 8) % 8;
    w.push(0, pad_bits);

    let mut out: Vec<u8> =
        w.bits.chunks(8).map(|c| c.iter().fold(0u8, |acc, &b| acc << 1 | b as u8)).collect();
    let mut pad = PAD.iter().cycle();
    while out.len() < data_codewords {
        out.push(*pad.next().unwrap());
    }
    out
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl BitReader<'_> {
    fn remaining(&self) -> usize {
        self.data.len() * 8 - self.pos
    }

    fn read(&mut self, len: usize) -> u32 {
        let mut v = 0;
        for _ in 0..len {
            let bit = self.data[self.pos / 8] >> (7 - self.pos % 8) & 1;
            v = v << 1 | bit as u32;
            self.pos += 1;
        }
        v
    }
}

/// Concatenated content of every byte-mode segment up to the terminator.
pub fn decode_data(data: &[u8], version: u8) -> Result<Vec<u8>, QrError> {
    let mut r = BitReader { data, pos: 0 };
    let mut out = Vec::new();
    let count_len = tables::count_bits(version);
    loop {
        if r.remaining() < 4 {
            break;
        }
        match r.read(4) {
            MODE_TERMINATOR => break,
            MODE_BYTE => {
                if r.remaining() < count_len {
                    return Err(QrError::MalformedSegment);
                }
                let count = r.read(count_len) as usize;
                if r.remaining() < count * 8 {
                    return Err(QrError::MalformedSegment);
                }
                out.extend((0..count).map(|_| r.read(8) as u8));
            }
            mode => return Err(QrError::UnsupportedMode(mode as u8)),
        }
    }
    Ok(out)
}
