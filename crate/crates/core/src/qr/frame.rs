//! Splitting codewords into blocks and interleaving them.

use alloc::vec::Vec;

use qrseal_wire::EcLevel;

use super::tables;
use crate::rs;

/// Per-block data/ecc lengths for one (version, EC level).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    pub ecc_len: usize,
    pub data_lens: Vec<usize>,
}

impl BlockStructure {
    pub fn for_symbol(version: u8, ec: EcLevel) -> Self {
        let blocks = tables::num_blocks(version, ec);
        let ecc_len = tables::ecc_per_block(version, ec);
        let raw = tables::total_codewords(version);
        let short = blocks - raw % blocks;
        let short_data = raw / blocks - ecc_len;
        let data_lens = (0..blocks).map(|i| if i < short { short_data } else { short_data + 1 }).collect();
        Self { ecc_len, data_lens }
    }

    pub fn data_total(&self) -> usize {
        self.data_lens.iter().sum()
    }

    pub fn total(&self) -> usize {
        self.data_total() + self.ecc_len * self.data_lens.len()
    }

    /// `(block, index within block)` for each codeword in transmission order:
    /// data columns across blocks first, then ecc columns.
    pub fn transmission_order(&self) -> Vec<(usize, usize)> {
        let max_data = self.data_lens.iter().copied().max().unwrap_or(0);
        let mut order = Vec::with_capacity(self.total());
        for i in 0..max_data {
            for (b, &len) in self.data_lens.iter().enumerate() {
                if i < len {
                    order.push((b, i));
                }
            }
        }
        for i in 0..self.ecc_len {
            for (b, &len) in self.data_lens.iter().enumerate() {
                order.push((b, len + i));
            }
        }
        order
    }

    /// Where codeword `index` of `block` sits in the interleaved stream.
    pub fn stream_position(&self, block: usize, index: usize) -> Option<usize> {
        self.transmission_order().iter().position(|&(b, i)| b == block && i == index)
    }

    pub fn interleave(&self, blocks: &[Vec<u8>]) -> Vec<u8> {
        self.transmission_order().into_iter().map(|(b, i)| blocks[b][i]).collect()
    }

    pub fn deinterleave(&self, stream: &[u8]) -> Vec<Vec<u8>> {
        let mut blocks: Vec<Vec<u8>> =
            self.data_lens.iter().map(|&l| alloc::vec![0u8; l + self.ecc_len]).collect();
        for ((b, i), &c) in self.transmission_order().into_iter().zip(stream) {
            blocks[b][i] = c;
        }
        blocks
    }
}

/// Data codewords plus their parity, grouped by block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodewordFrame {
    pub structure: BlockStructure,
    /// Each block: data codewords followed by ecc codewords.
    pub blocks: Vec<Vec<u8>>,
}

impl CodewordFrame {
    pub fn build(structure: BlockStructure, data: &[u8]) -> Self {
        debug_assert_eq!(data.len(), structure.data_total());
        let gen = rs::generator(structure.ecc_len);
        let mut blocks = Vec::with_capacity(structure.data_lens.len());
        let mut rest = data;
        for &len in &structure.data_lens {
            let (chunk, tail) = rest.split_at(len);
            rest = tail;
            let mut block = chunk.to_vec();
            block.extend(rs::remainder(chunk, &gen));
            blocks.push(block);
        }
        Self { structure, blocks }
    }

    pub fn data_codewords(&self) -> Vec<u8> {
        self.blocks.iter().zip(&self.structure.data_lens).flat_map(|(b, &l)| b[..l].iter().copied()).collect()
    }

    pub fn ecc_codewords(&self) -> Vec<u8> {
        self.blocks.iter().zip(&self.structure.data_lens).flat_map(|(b, &l)| b[l..].iter().copied()).collect()
    }

    pub fn interleaved(&self) -> Vec<u8> {
        self.structure.interleave(&self.blocks)
    }
}
