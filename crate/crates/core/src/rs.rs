//! Reed-Solomon over GF(256) as used by QR symbols.
//!
//! Codewords are written highest-degree coefficient first: byte `k` of an
//! `n`-byte codeword is the coefficient of x^(n-1-k). The generator is
//! ∏(x − α^i) for i in 0..ecc_len, so syndromes are r(α^0)..r(α^(ecc_len-1)).
//! Decoding runs Berlekamp-Massey, Chien search and Forney.

use alloc::vec;
use alloc::vec::Vec;

use crate::gf256;

pub const MIN_ECC: usize = 7;
pub const MAX_ECC: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum RsError {
    #[error("invalid Reed-Solomon parameters (ecc_len {ecc_len}, total {total})")]
    InvalidParams { ecc_len: usize, total: usize },
    #[error("too many errors to correct")]
    Uncorrectable,
}

fn check_params(data_len: usize, ecc_len: usize) -> Result<(), RsError> {
    if !(MIN_ECC..=MAX_ECC).contains(&ecc_len) || data_len + ecc_len > 255 {
        return Err(RsError::InvalidParams { ecc_len, total: data_len + ecc_len });
    }
    Ok(())
}

/// Generator coefficients, leading 1 omitted, highest degree first.
pub fn generator(ecc_len: usize) -> Vec<u8> {
    let mut g = vec![0u8; ecc_len];
    g[ecc_len - 1] = 1;
    let mut root = 1u8;
    for _ in 0..ecc_len {
        // Multiply the current product by (x - root).
        for j in 0..ecc_len {
            g[j] = gf256::mul(g[j], root);
            if j + 1 < ecc_len {
                g[j] ^= g[j + 1];
            }
        }
        root = gf256::mul(root, 2);
    }
    g
}

pub(crate) fn remainder(data: &[u8], gen: &[u8]) -> Vec<u8> {
    let mut rem = vec![0u8; gen.len()];
    for &b in data {
        let factor = b ^ rem[0];
        rem.rotate_left(1);
        *rem.last_mut().unwrap() = 0;
        for (r, &g) in rem.iter_mut().zip(gen) {
            *r ^= gf256::mul(g, factor);
        }
    }
    rem
}

/// The `ecc_len` parity bytes for `data`.
pub fn rs_encode(data: &[u8], ecc_len: usize) -> Result<Vec<u8>, RsError> {
    check_params(data.len(), ecc_len)?;
    Ok(remainder(data, &generator(ecc_len)))
}

/// Corrects a full codeword (data followed by parity) and returns the data part.
pub fn rs_correct(codeword: &[u8], ecc_len: usize) -> Result<Vec<u8>, RsError> {
    if codeword.len() < ecc_len {
        return Err(RsError::InvalidParams { ecc_len, total: codeword.len() });
    }
    check_params(codeword.len() - ecc_len, ecc_len)?;
    let mut buf = codeword.to_vec();
    correct_in_place(&mut buf, ecc_len)?;
    buf.truncate(codeword.len() - ecc_len);
    Ok(buf)
}

fn syndromes(cw: &[u8], ecc_len: usize) -> Vec<u8> {
    (0..ecc_len)
        .map(|i| {
            let x = gf256::exp(i);
            cw.iter().fold(0u8, |acc, &c| gf256::mul(acc, x) ^ c)
        })
        .collect()
}

/// Evaluates a polynomial stored lowest degree first.
fn eval_low_first(poly: &[u8], x: u8) -> u8 {
    poly.iter().rev().fold(0u8, |acc, &c| gf256::mul(acc, x) ^ c)
}

/// Fixes up to ⌊ecc_len/2⌋ byte errors in place; returns how many were fixed.
pub(crate) fn correct_in_place(cw: &mut [u8], ecc_len: usize) -> Result<usize, RsError> {
    let synd = syndromes(cw, ecc_len);
    if synd.iter().all(|&s| s == 0) {
        return Ok(0);
    }

    // Berlekamp-Massey; polynomials lowest degree first.
    let mut lambda = vec![0u8; ecc_len + 1];
    let mut prev = vec![0u8; ecc_len + 1];
    lambda[0] = 1;
    prev[0] = 1;
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut prev_disc = 1u8;
    for n in 0..ecc_len {
        let mut disc = synd[n];
        for i in 1..=l {
            disc ^= gf256::mul(lambda[i], synd[n - i]);
        }
        if disc == 0 {
            shift += 1;
            continue;
        }
        let coef = gf256::div(disc, prev_disc);
        let snapshot = lambda.clone();
        for i in 0..=ecc_len - shift {
            lambda[i + shift] ^= gf256::mul(coef, prev[i]);
        }
        if 2 * l <= n {
            l = n + 1 - l;
            prev = snapshot;
            prev_disc = disc;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    lambda.truncate(l + 1);
    if l == 0 || 2 * l > ecc_len {
        return Err(RsError::Uncorrectable);
    }

    // Chien search over the positions the (possibly shortened) codeword has.
    let n = cw.len();
    let mut positions = Vec::with_capacity(l);
    for k in 0..n {
        let degree = n - 1 - k;
        // Root of Λ at X^-1 with X = α^degree.
        let x_inv = gf256::exp(255 - degree % 255);
        if eval_low_first(&lambda, x_inv) == 0 {
            positions.push(k);
        }
    }
    if positions.len() != l {
        return Err(RsError::Uncorrectable);
    }

    // Ω(x) = S(x)Λ(x) mod x^ecc_len.
    let mut omega = vec![0u8; ecc_len];
    for (i, &s) in synd.iter().enumerate() {
        for (j, &lam) in lambda.iter().enumerate() {
            if i + j < ecc_len {
                omega[i + j] ^= gf256::mul(s, lam);
            }
        }
    }
    // Formal derivative: only odd-degree terms survive in characteristic 2.
    let deriv: Vec<u8> = (1..lambda.len()).map(|i| if i % 2 == 1 { lambda[i] } else { 0 }).collect();

    for &k in &positions {
        let degree = n - 1 - k;
        let x = gf256::exp(degree);
        let x_inv = gf256::inv(x);
        let denom = eval_low_first(&deriv, x_inv);
        if denom == 0 {
            return Err(RsError::Uncorrectable);
        }
        let magnitude = gf256::mul(x, gf256::div(eval_low_first(&omega, x_inv), denom));
        cw[k] ^= magnitude;
    }

    if syndromes(cw, ecc_len).iter().any(|&s| s != 0) {
        return Err(RsError::Uncorrectable);
    }
    Ok(positions.len())
}
