//! Demonstration-grade RSA with OAEP padding (SHA-1, MGF1, empty label).
//!
//! No constant-time guarantees. Key sizes 512/1024/2048; 512 exists only so
//! tests stay fast.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand_core::{CryptoRng, RngCore};
use sha1::{Digest, Sha1};

use super::SealError;

pub const PUBLIC_EXPONENT: u32 = 65537;
pub const MILLER_RABIN_ROUNDS: usize = 40;
pub const HASH_LEN: usize = 20;
pub const SUPPORTED_BITS: [usize; 3] = [512, 1024, 2048];

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RsaPublicKey {
    pub n: BigUint,
    pub e: BigUint,
}

#[derive(Clone, PartialEq, Eq)]
pub struct RsaPrivateKey {
    pub n: BigUint,
    pub(crate) d: BigUint,
}

impl RsaPrivateKey {
    pub fn from_parts(n: BigUint, d: BigUint) -> Self {
        Self { n, d }
    }

    pub fn exponent(&self) -> &BigUint {
        &self.d
    }
}

impl fmt::Debug for RsaPrivateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RsaPrivateKey")
            .field("modulus_bits", &self.n.bits())
            .field("d", &"<redacted>")
            .finish()
    }
}

pub fn modulus_bytes(n: &BigUint) -> usize {
    (n.bits() as usize).div_ceil(8)
}

pub fn max_message_len(n: &BigUint) -> usize {
    modulus_bytes(n).saturating_sub(2 * HASH_LEN + 2)
}

const SMALL_PRIMES: [u32; 54] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103,
    107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223,
    227, 229, 233, 239, 241, 251,
];

/// Uniform in `[low, high)`; `high > low`.
fn random_below<R: RngCore>(rng: &mut R, low: &BigUint, high: &BigUint) -> BigUint {
    let span = high - low;
    let bytes = (span.bits() as usize).div_ceil(8);
    let excess = bytes * 8 - span.bits() as usize;
    let mut buf = vec![0u8; bytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[0] &= 0xFF >> excess;
        let v = BigUint::from_bytes_be(&buf);
        if v < span {
            return low + v;
        }
    }
}

pub fn is_probable_prime<R: RngCore>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for _ in 0..rounds {
        let a = random_below(rng, &two, &n_minus_1);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A probable prime with exactly `bits` bits and its top two bits set.
fn random_prime<R: RngCore>(bits: usize, rng: &mut R) -> BigUint {
    let bytes = bits.div_ceil(8);
    let excess = bytes * 8 - bits;
    let mut buf = vec![0u8; bytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[0] &= 0xFF >> excess;
        buf[0] |= 0xC0 >> excess;
        buf[bytes - 1] |= 1;
        let candidate = BigUint::from_bytes_be(&buf);
        if is_probable_prime(&candidate, MILLER_RABIN_ROUNDS, rng) {
            return candidate;
        }
    }
}

pub fn generate<R: RngCore + CryptoRng>(
    bits: usize,
    rng: &mut R,
) -> Result<(RsaPublicKey, RsaPrivateKey), SealError> {
    if !SUPPORTED_BITS.contains(&bits) {
        return Err(SealError::InvalidParam);
    }
    let e = BigUint::from(PUBLIC_EXPONENT);
    loop {
        let p = random_prime(bits / 2, rng);
        let q = random_prime(bits - bits / 2, rng);
        if p == q {
            continue;
        }
        let n = &p * &q;
        if n.bits() as usize != bits {
            continue;
        }
        let lambda = (&p - 1u32).lcm(&(&q - 1u32));
        let Some(d) = e.modinv(&lambda) else {
            continue;
        };
        return Ok((RsaPublicKey { n: n.clone(), e }, RsaPrivateKey { n, d }));
    }
}

fn mgf1(seed: &[u8], len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len + HASH_LEN);
    let mut counter: u32 = 0;
    while out.len() < len {
        let mut h = Sha1::new();
        h.update(seed);
        h.update(counter.to_be_bytes());
        out.extend_from_slice(&h.finalize());
        counter += 1;
    }
    out.truncate(len);
    out
}

fn i2osp(v: &BigUint, len: usize) -> Vec<u8> {
    let raw = v.to_bytes_be();
    let mut out = vec![0u8; len.saturating_sub(raw.len())];
    out.extend_from_slice(&raw);
    out
}

pub fn encrypt<R: RngCore + CryptoRng>(
    key: &RsaPublicKey,
    msg: &[u8],
    rng: &mut R,
) -> Result<Vec<u8>, SealError> {
    let k = modulus_bytes(&key.n);
    let max = max_message_len(&key.n);
    if msg.len() > max {
        return Err(SealError::TagTooLong { max });
    }
    let label_hash = Sha1::digest(b"");
    let db_len = k - HASH_LEN - 1;
    let mut db = vec![0u8; db_len];
    db[..HASH_LEN].copy_from_slice(&label_hash);
    db[db_len - msg.len() - 1] = 0x01;
    db[db_len - msg.len()..].copy_from_slice(msg);

    let mut seed = [0u8; HASH_LEN];
    rng.fill_bytes(&mut seed);
    for (b, m) in db.iter_mut().zip(mgf1(&seed, db_len)) {
        *b ^= m;
    }
    for (s, m) in seed.iter_mut().zip(mgf1(&db, HASH_LEN)) {
        *s ^= m;
    }
    let mut em = Vec::with_capacity(k);
    em.push(0);
    em.extend_from_slice(&seed);
    em.extend_from_slice(&db);

    let c = BigUint::from_bytes_be(&em).modpow(&key.e, &key.n);
    Ok(i2osp(&c, k))
}

/// `c^d mod n` as a k-byte block, before any padding check.
pub fn raw_decrypt(key: &RsaPrivateKey, ct: &[u8]) -> Result<Vec<u8>, SealError> {
    let k = modulus_bytes(&key.n);
    if ct.len() != k {
        return Err(SealError::DecryptError);
    }
    let c = BigUint::from_bytes_be(ct);
    if c >= key.n {
        return Err(SealError::DecryptError);
    }
    Ok(i2osp(&c.modpow(&key.d, &key.n), k))
}

pub fn decrypt(key: &RsaPrivateKey, ct: &[u8]) -> Result<Vec<u8>, SealError> {
    let k = modulus_bytes(&key.n);
    if k < 2 * HASH_LEN + 2 {
        return Err(SealError::DecryptError);
    }
    let em = raw_decrypt(key, ct)?;
    let (masked_seed, masked_db) = em[1..].split_at(HASH_LEN);
    let mut seed: Vec<u8> = masked_seed.to_vec();
    for (s, m) in seed.iter_mut().zip(mgf1(masked_db, HASH_LEN)) {
        *s ^= m;
    }
    let mut db = masked_db.to_vec();
    let db_len = db.len();
    for (b, m) in db.iter_mut().zip(mgf1(&seed, db_len)) {
        *b ^= m;
    }
    let label_ok = db[..HASH_LEN] == Sha1::digest(b"")[..];
    let rest = &db[HASH_LEN..];
    let sep = rest.iter().position(|&b| b != 0);
    match sep {
        Some(i) if em[0] == 0 && label_ok && rest[i] == 0x01 => Ok(rest[i + 1..].to_vec()),
        _ => Err(SealError::DecryptError),
    }
}
