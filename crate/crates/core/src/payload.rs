//! The dual-layer payload: `public ++ 0x00 ++ conceal(cipher)`.
//!
//! A conventional scanner stops at the NUL and shows only the public
//! prefix. The concealed part is the sealed private tag, whitened with a
//! keyed xorshift64* stream and then escaped so it never contains a NUL:
//!
//! | whitened byte | emitted      |
//! |---------------|--------------|
//! | `0x00`        | `0x1B 0x01`  |
//! | `0x1B`        | `0x1B 0x02`  |
//! | other         | unchanged    |

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::prng::Xorshift64Star;

pub const SEPARATOR: u8 = 0x00;
pub const ESCAPE: u8 = 0x1B;
const ESCAPED_NUL: u8 = 0x01;
const ESCAPED_ESC: u8 = 0x02;

pub const MIN_KEY_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum PayloadError {
    #[error("input must be non-empty")]
    InvalidInput,
    #[error("modification key must be at least {MIN_KEY_LEN} bytes")]
    InvalidKey,
    #[error("dangling or unknown escape sequence")]
    MalformedEscape,
    #[error("concealed blob contains a NUL byte or is empty")]
    MalformedBlob,
    #[error("public string must be printable ASCII")]
    InvalidPublic,
    #[error("private tag must be non-empty base-62")]
    InvalidPrivate,
    #[error("payload has no NUL separator")]
    MissingSeparator,
    #[error("nothing follows the separator")]
    EmptyPrivate,
}

pub fn is_printable_ascii(s: &[u8]) -> bool {
    s.iter().all(|b| (0x20..=0x7E).contains(b))
}

pub fn is_base62(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric())
}

/// Public string and private tag carried by one unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtectedTag {
    public: String,
    private: String,
}

impl ProtectedTag {
    pub fn new(public: impl Into<String>, private: impl Into<String>) -> Result<Self, PayloadError> {
        let (public, private) = (public.into(), private.into());
        if !is_printable_ascii(public.as_bytes()) {
            return Err(PayloadError::InvalidPublic);
        }
        if !is_base62(&private) {
            return Err(PayloadError::InvalidPrivate);
        }
        Ok(Self { public, private })
    }

    pub fn public(&self) -> &str {
        &self.public
    }

    pub fn private(&self) -> &str {
        &self.private
    }
}

/// The secret that drives the whitening keystream.
#[derive(Clone, PartialEq, Eq)]
pub struct ModificationKey(Vec<u8>);

impl ModificationKey {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self, PayloadError> {
        let bytes = bytes.into();
        if bytes.len() < MIN_KEY_LEN {
            return Err(PayloadError::InvalidKey);
        }
        Ok(Self(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    fn keystream(&self) -> Xorshift64Star {
        let mut seed = [0u8; 8];
        seed.copy_from_slice(&self.0[..8]);
        Xorshift64Star::new(u64::from_be_bytes(seed))
    }
}

impl fmt::Debug for ModificationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModificationKey(<{} bytes>)", self.0.len())
    }
}

/// Output of [`conceal`]. Blobs produced by `conceal` never hold a NUL;
/// blobs split off a received payload are checked by [`reveal`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcealedBlob(Vec<u8>);

impl ConcealedBlob {
    pub fn from_bytes(bytes: impl Into<Vec<u8>>) -> Self {
        Self(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Bytes handed to the QR encoder, or read back by the decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrPayload(Vec<u8>);

impl QrPayload {
    /// Wraps decoder output, which need not be well framed.
    pub fn from_raw(bytes: Vec<u8>) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn conceal(cipher: &[u8], key: &ModificationKey) -> Result<ConcealedBlob, PayloadError> {
    if cipher.is_empty() {
        return Err(PayloadError::InvalidInput);
    }
    let mut ks = key.keystream();
    let mut out = Vec::with_capacity(cipher.len() + cipher.len() / 64 + 2);
    for &b in cipher {
        match b ^ ks.next_byte() {
            SEPARATOR => out.extend_from_slice(&[ESCAPE, ESCAPED_NUL]),
            ESCAPE => out.extend_from_slice(&[ESCAPE, ESCAPED_ESC]),
            w => out.push(w),
        }
    }
    Ok(ConcealedBlob(out))
}

pub fn reveal(blob: &ConcealedBlob, key: &ModificationKey) -> Result<Vec<u8>, PayloadError> {
    if blob.0.is_empty() || blob.0.contains(&SEPARATOR) {
        return Err(PayloadError::MalformedBlob);
    }
    let mut ks = key.keystream();
    let mut out = Vec::with_capacity(blob.0.len());
    let mut bytes = blob.0.iter();
    while let Some(&b) = bytes.next() {
        let whitened = if b == ESCAPE {
            match bytes.next() {
                Some(&ESCAPED_NUL) => SEPARATOR,
                Some(&ESCAPED_ESC) => ESCAPE,
                _ => return Err(PayloadError::MalformedEscape),
            }
        } else {
            b
        };
        out.push(whitened ^ ks.next_byte());
    }
    Ok(out)
}

pub fn frame(public: &str, concealed: &ConcealedBlob) -> Result<QrPayload, PayloadError> {
    if !is_printable_ascii(public.as_bytes()) {
        return Err(PayloadError::InvalidPublic);
    }
    let mut bytes = Vec::with_capacity(public.len() + 1 + concealed.len());
    bytes.extend_from_slice(public.as_bytes());
    bytes.push(SEPARATOR);
    bytes.extend_from_slice(concealed.as_bytes());
    Ok(QrPayload(bytes))
}

/// What an off-the-shelf scanner would display.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConventionalView {
    pub text: String,
    /// False when the payload had no separator and was shown whole.
    pub protected: bool,
}

pub fn parse_conventional(payload: &[u8]) -> ConventionalView {
    let (visible, protected) = match payload.iter().position(|&b| b == SEPARATOR) {
        Some(i) => (&payload[..i], true),
        None => (payload, false),
    };
    let text =
        visible.iter().map(|&b| if b.is_ascii() { b as char } else { char::REPLACEMENT_CHARACTER }).collect();
    ConventionalView { text, protected }
}

pub fn parse_protected(payload: &[u8]) -> Result<(String, ConcealedBlob), PayloadError> {
    let sep = payload.iter().position(|&b| b == SEPARATOR).ok_or(PayloadError::MissingSeparator)?;
    let (public, rest) = (&payload[..sep], &payload[sep + 1..]);
    if rest.is_empty() {
        return Err(PayloadError::EmptyPrivate);
    }
    if !is_printable_ascii(public) {
        return Err(PayloadError::InvalidPublic);
    }
    let public = core::str::from_utf8(public).expect("printable ASCII is UTF-8");
    Ok((public.into(), ConcealedBlob(rest.to_vec())))
}
