//! Seal, conceal, frame and encode a tag, and the reverse.

use alloc::string::String;
use core::fmt;

use qrseal_wire::EcLevel;
use rand_core::{CryptoRng, RngCore};

use crate::payload::{self, ModificationKey, PayloadError, ProtectedTag};
use crate::qr::{self, Matrix, QrError, QrSymbol};
use crate::seal::{self, CipherText, OpenKey, SealError, SealKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ProtectError {
    #[error(transparent)]
    Seal(#[from] SealError),
    #[error(transparent)]
    Payload(#[from] PayloadError),
    #[error(transparent)]
    Qr(#[from] QrError),
}

/// Where a protected decode gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecodeStage {
    QrDecode,
    Payload,
    Reveal,
    Decrypt,
    TagFormat,
}

impl DecodeStage {
    pub const ALL: [DecodeStage; 5] = [
        DecodeStage::QrDecode,
        DecodeStage::Payload,
        DecodeStage::Reveal,
        DecodeStage::Decrypt,
        DecodeStage::TagFormat,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DecodeStage::QrDecode => "qr-decode",
            DecodeStage::Payload => "payload",
            DecodeStage::Reveal => "reveal",
            DecodeStage::Decrypt => "decrypt",
            DecodeStage::TagFormat => "tag-format",
        }
    }
}

impl fmt::Display for DecodeStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for DecodeStage {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Self::ALL.into_iter().find(|st| st.as_str() == s).ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecodedTag {
    pub public: String,
    pub private: String,
}

pub type DecodeOutcome = Result<DecodedTag, DecodeStage>;

/// A decoder that could not be reached at all, as opposed to one that
/// reached a verdict about the symbol.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("decoder unavailable: {0}")]
pub struct DecoderUnavailable(pub String);

pub trait TagDecoder {
    fn decode(&self, symbol: &QrSymbol) -> Result<DecodeOutcome, DecoderUnavailable>;
}

/// Key material needed to read protected symbols.
#[derive(Debug, Clone)]
pub struct TagKeys {
    pub open: OpenKey,
    pub conceal: ModificationKey,
}

/// The in-process decoder.
#[derive(Debug, Clone)]
pub struct Integrated {
    pub keys: TagKeys,
}

impl TagDecoder for Integrated {
    fn decode(&self, symbol: &QrSymbol) -> Result<DecodeOutcome, DecoderUnavailable> {
        Ok(decode_protected(&symbol.modules, &self.keys))
    }
}

pub fn protect_tag<R: RngCore + CryptoRng>(
    tag: &ProtectedTag,
    seal_key: &SealKey,
    conceal_key: &ModificationKey,
    ec: EcLevel,
    rng: &mut R,
) -> Result<QrSymbol, ProtectError> {
    let ct = seal::seal(tag.private().as_bytes(), seal_key, rng)?;
    let blob = payload::conceal(&ct.bytes, conceal_key)?;
    let framed = payload::frame(tag.public(), &blob)?;
    Ok(qr::encode_symbol(&framed, ec, None)?)
}

pub fn decode_protected(m: &Matrix, keys: &TagKeys) -> DecodeOutcome {
    let framed = qr::decode_symbol(m).map_err(|_| DecodeStage::QrDecode)?;
    let (public, blob) = payload::parse_protected(framed.as_bytes()).map_err(|_| DecodeStage::Payload)?;
    let cipher = payload::reveal(&blob, &keys.conceal).map_err(|_| DecodeStage::Reveal)?;
    let ct = CipherText { scheme: keys.open.scheme(), bytes: cipher };
    let plain = seal::open(&ct, &keys.open).map_err(|_| DecodeStage::Decrypt)?;
    let private = String::from_utf8(plain).map_err(|_| DecodeStage::TagFormat)?;
    if !payload::is_base62(&private) {
        return Err(DecodeStage::TagFormat);
    }
    Ok(DecodedTag { public, private })
}
