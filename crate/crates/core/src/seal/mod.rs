//! Encryption of the private tag behind one interface, two schemes.
//!
//! `RsaDemo` is RSA-OAEP at demonstration strength. `XorTest` XORs the tag
//! with a repeating 32-byte key; it is deterministic and exists so
//! golden files and cross-module tests can be byte-exact.

pub mod rsa;

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use rand_core::{CryptoRng, RngCore};

pub use rsa::{RsaPrivateKey, RsaPublicKey};

pub const XOR_KEY_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SealError {
    #[error("unsupported scheme parameters")]
    InvalidParam,
    #[error("tag must be non-empty")]
    EmptyTag,
    #[error("tag longer than the {max}-byte limit for this key")]
    TagTooLong { max: usize },
    #[error("decryption failed")]
    DecryptError,
    #[error("malformed key file")]
    InvalidKeyFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Scheme {
    RsaDemo = 1,
    XorTest = 2,
}

impl Scheme {
    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(Scheme::RsaDemo),
            2 => Some(Scheme::XorTest),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::RsaDemo => "rsa-demo",
            Scheme::XorTest => "xor-test",
        }
    }
}

impl core::str::FromStr for Scheme {
    type Err = SealError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rsa-demo" | "RSA_DEMO" => Ok(Scheme::RsaDemo),
            "xor-test" | "XOR_TEST" => Ok(Scheme::XorTest),
            _ => Err(SealError::InvalidParam),
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct XorKey(pub [u8; XOR_KEY_LEN]);

impl fmt::Debug for XorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("XorKey(<redacted>)")
    }
}

/// Encryption half.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SealKey {
    Rsa(RsaPublicKey),
    Xor(XorKey),
}

/// Decryption half.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpenKey {
    Rsa(RsaPrivateKey),
    Xor(XorKey),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPair {
    pub public: SealKey,
    pub private: OpenKey,
}

impl KeyPair {
    pub fn scheme(&self) -> Scheme {
        self.public.scheme()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherText {
    pub scheme: Scheme,
    pub bytes: Vec<u8>,
}

impl SealKey {
    pub fn scheme(&self) -> Scheme {
        match self {
            SealKey::Rsa(_) => Scheme::RsaDemo,
            SealKey::Xor(_) => Scheme::XorTest,
        }
    }

    /// Largest tag this key can seal, `None` if unbounded.
    pub fn max_tag_len(&self) -> Option<usize> {
        match self {
            SealKey::Rsa(k) => Some(rsa::max_message_len(&k.n)),
            SealKey::Xor(_) => None,
        }
    }
}

impl OpenKey {
    pub fn scheme(&self) -> Scheme {
        match self {
            OpenKey::Rsa(_) => Scheme::RsaDemo,
            OpenKey::Xor(_) => Scheme::XorTest,
        }
    }
}

/// `bits` is ignored for `XorTest`.
pub fn generate_keypair<R: RngCore + CryptoRng>(
    scheme: Scheme,
    bits: usize,
    rng: &mut R,
) -> Result<KeyPair, SealError> {
    match scheme {
        Scheme::RsaDemo => {
            let (public, private) = rsa::generate(bits, rng)?;
            Ok(KeyPair { public: SealKey::Rsa(public), private: OpenKey::Rsa(private) })
        }
        Scheme::XorTest => {
            let mut k = [0u8; XOR_KEY_LEN];
            rng.fill_bytes(&mut k);
            Ok(KeyPair { public: SealKey::Xor(XorKey(k)), private: OpenKey::Xor(XorKey(k)) })
        }
    }
}

fn xor_with(key: &XorKey, data: &[u8]) -> Vec<u8> {
    data.iter().zip(key.0.iter().cycle()).map(|(d, k)| d ^ k).collect()
}

pub fn seal<R: RngCore + CryptoRng>(tag: &[u8], key: &SealKey, rng: &mut R) -> Result<CipherText, SealError> {
    if tag.is_empty() {
        return Err(SealError::EmptyTag);
    }
    let bytes = match key {
        SealKey::Rsa(k) => rsa::encrypt(k, tag, rng)?,
        SealKey::Xor(k) => xor_with(k, tag),
    };
    Ok(CipherText { scheme: key.scheme(), bytes })
}

/// Every failure, whatever its cause, is the same `DecryptError`.
pub fn open(ct: &CipherText, key: &OpenKey) -> Result<Vec<u8>, SealError> {
    if ct.scheme != key.scheme() || ct.bytes.is_empty() {
        return Err(SealError::DecryptError);
    }
    match key {
        OpenKey::Rsa(k) => rsa::decrypt(k, &ct.bytes),
        OpenKey::Xor(k) => Ok(xor_with(k, &ct.bytes)),
    }
}

// Key files: scheme id byte, then u32-be length-prefixed big-endian
// integers (n, e or n, d) for RSA, or the raw 32 key bytes for XOR.

fn push_int(out: &mut Vec<u8>, v: &BigUint) {
    let b = v.to_bytes_be();
    out.extend_from_slice(&(b.len() as u32).to_be_bytes());
    out.extend_from_slice(&b);
}

fn take_int(input: &mut &[u8]) -> Result<BigUint, SealError> {
    if input.len() < 4 {
        return Err(SealError::InvalidKeyFile);
    }
    let len = u32::from_be_bytes(input[..4].try_into().unwrap()) as usize;
    let rest = &input[4..];
    if len == 0 || rest.len() < len {
        return Err(SealError::InvalidKeyFile);
    }
    let v = BigUint::from_bytes_be(&rest[..len]);
    *input = &rest[len..];
    Ok(v)
}

fn split_scheme(bytes: &[u8]) -> Result<(Scheme, &[u8]), SealError> {
    let (&id, rest) = bytes.split_first().ok_or(SealError::InvalidKeyFile)?;
    Ok((Scheme::from_id(id).ok_or(SealError::InvalidKeyFile)?, rest))
}

fn xor_from(rest: &[u8]) -> Result<XorKey, SealError> {
    rest.try_into().map(XorKey).map_err(|_| SealError::InvalidKeyFile)
}

fn rsa_pair_from(mut rest: &[u8]) -> Result<(BigUint, BigUint), SealError> {
    let a = take_int(&mut rest)?;
    let b = take_int(&mut rest)?;
    if !rest.is_empty() {
        return Err(SealError::InvalidKeyFile);
    }
    Ok((a, b))
}

impl SealKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = alloc::vec![self.scheme().id()];
        match self {
            SealKey::Rsa(k) => {
                push_int(&mut out, &k.n);
                push_int(&mut out, &k.e);
            }
            SealKey::Xor(k) => out.extend_from_slice(&k.0),
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SealError> {
        match split_scheme(bytes)? {
            (Scheme::RsaDemo, rest) => {
                let (n, e) = rsa_pair_from(rest)?;
                Ok(SealKey::Rsa(RsaPublicKey { n, e }))
            }
            (Scheme::XorTest, rest) => xor_from(rest).map(SealKey::Xor),
        }
    }
}

impl OpenKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = alloc::vec![self.scheme().id()];
        match self {
            OpenKey::Rsa(k) => {
                push_int(&mut out, &k.n);
                push_int(&mut out, k.exponent());
            }
            OpenKey::Xor(k) => out.extend_from_slice(&k.0),
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SealError> {
        match split_scheme(bytes)? {
            (Scheme::RsaDemo, rest) => {
                let (n, d) = rsa_pair_from(rest)?;
                Ok(OpenKey::Rsa(RsaPrivateKey::from_parts(n, d)))
            }
            (Scheme::XorTest, rest) => xor_from(rest).map(OpenKey::Xor),
        }
    }
}
