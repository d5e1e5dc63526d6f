//! Seeded simulation of the print and inspection loop.
//!
//! Each unit is dispensed, sealed and encoded, smeared by independent
//! per-module flips, decoded, and checked against staging. A unit is
//! accepted exactly when its decode succeeds and the decoded tag is still
//! staged; otherwise it is rejected and its tag is never reused.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use qrseal_wire::EcLevel;
use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;

use crate::payload::{ModificationKey, ProtectedTag};
use crate::pipeline::{protect_tag, DecoderUnavailable, ProtectError, TagDecoder};
use crate::prng::Xorshift64Star;
use crate::qr::QrSymbol;
use crate::registry::{Registry, RegistryError};
use crate::seal::SealKey;

/// Keeps the distortion stream apart from anything else seeded with the same value.
pub const DISTORT_SEED_DOMAIN: u64 = 0x51CA_DA7A_0000_0001;
const ZERO_STATE_SUBSTITUTE: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn distortion_rng(seed: u64) -> Xorshift64Star {
    match seed ^ DISTORT_SEED_DOMAIN {
        0 => Xorshift64Star::new(ZERO_STATE_SUBSTITUTE),
        s => Xorshift64Star::new(s),
    }
}

/// Flips each module, function patterns included, with probability `p`.
/// Returns the distorted symbol and how many modules flipped.
pub fn distort(sym: &QrSymbol, p: f64, rng: &mut Xorshift64Star) -> (QrSymbol, usize) {
    let mut out = sym.clone();
    let mut flipped = 0;
    let side = out.side();
    for y in 0..side {
        for x in 0..side {
            if rng.next_unit() < p {
                out.modules.flip(x, y);
                flipped += 1;
            }
        }
    }
    (out, flipped)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    Integrated,
    Remote,
}

impl DecodeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DecodeMode::Integrated => "INTEGRATED",
            DecodeMode::Remote => "REMOTE",
        }
    }
}

impl fmt::Display for DecodeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for DecodeMode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "INTEGRATED" | "integrated" => Ok(DecodeMode::Integrated),
            "REMOTE" | "remote" => Ok(DecodeMode::Remote),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Accept => "ACCEPT",
            Decision::Reject => "REJECT",
        }
    }
}

pub const STAGING_MISS: &str = "staging-miss";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inspection {
    pub tag: Option<String>,
    pub decode_ok: bool,
    pub staging_hit: bool,
    pub decision: Decision,
    /// Decode stage name or [`STAGING_MISS`]; `None` on accept.
    pub reason: Option<&'static str>,
}

pub fn inspect(
    sym: &QrSymbol,
    decoder: &dyn TagDecoder,
    registry: &Registry,
) -> Result<Inspection, DecoderUnavailable> {
    Ok(match decoder.decode(sym)? {
        Err(stage) => Inspection {
            tag: None,
            decode_ok: false,
            staging_hit: false,
            decision: Decision::Reject,
            reason: Some(stage.as_str()),
        },
        Ok(decoded) => {
            let hit = registry.verify_staging(&decoded.private).is_some();
            Inspection {
                tag: Some(decoded.private),
                decode_ok: true,
                staging_hit: hit,
                decision: if hit { Decision::Accept } else { Decision::Reject },
                reason: if hit { None } else { Some(STAGING_MISS) },
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineConfig {
    pub batch_id: String,
    pub flip_probability: f64,
    pub decode_mode: DecodeMode,
    pub rng_seed: u64,
    pub ec_level: EcLevel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitOutcome {
    pub seq: usize,
    pub tag: String,
    pub flipped: usize,
    pub decode_ok: bool,
    pub staging_hit: bool,
    pub decision: Decision,
    pub reason: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineReport {
    pub config: LineConfig,
    pub units: Vec<UnitOutcome>,
    pub accepted: usize,
    pub rejected: usize,
    /// Wall-clock nanoseconds spent in the decoder, per unit. Not part of
    /// the canonical text, which must not depend on the host.
    pub decode_nanos: Vec<u64>,
}

impl LineReport {
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "line_report=1\nbatch={}\nmode={}\nseed={}\nflip_probability={}\nec={}\nunits={}\naccepted={}\nrejected={}\n",
            c.batch_id,
            c.decode_mode,
            c.rng_seed,
            c.flip_probability,
            c.ec_level,
            self.units.len(),
            self.accepted,
            self.rejected
        );
        for u in &self.units {
            let _ = writeln!(
                out,
                "unit\tseq={}\ttag={}\tflipped={}\tdecode_ok={}\tstaging_hit={}\tdecision={}\treason={}",
                u.seq,
                u.tag,
                u.flipped,
                u.decode_ok,
                u.staging_hit,
                u.decision.as_str(),
                u.reason.unwrap_or("-")
            );
        }
        out
    }

    pub fn median_decode_nanos(&self) -> Option<u64> {
        let mut v = self.decode_nanos.clone();
        v.sort_unstable();
        v.get(v.len() / 2).copied()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LineError {
    #[error("flip probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("encoding failed: {0}")]
    Protect(#[from] ProtectError),
    #[error(transparent)]
    Decoder(#[from] DecoderUnavailable),
}

pub struct LineKeys<'a> {
    pub seal: &'a SealKey,
    pub conceal: &'a ModificationKey,
}

/// Runs every remaining unit of the batch. `clock` returns monotonic
/// nanoseconds and only feeds `decode_nanos`; `at` stamps registry events.
pub fn run_line(
    cfg: &LineConfig,
    registry: &mut Registry,
    keys: &LineKeys<'_>,
    decoder: &dyn TagDecoder,
    clock: &dyn Fn() -> u64,
    at: i64,
) -> Result<LineReport, LineError> {
    let p = cfg.flip_probability;
    if !(0.0..=1.0).contains(&p) {
        return Err(LineError::InvalidProbability(p));
    }
    let mut seal_rng = ChaCha20Rng::seed_from_u64(cfg.rng_seed);
    let mut smear = distortion_rng(cfg.rng_seed);
    let mut report = LineReport {
        config: cfg.clone(),
        units: Vec::new(),
        accepted: 0,
        rejected: 0,
        decode_nanos: Vec::new(),
    };
    loop {
        let record = match registry.next_unprinted(&cfg.batch_id) {
            Ok(r) => r,
            Err(RegistryError::BatchExhausted(_)) if !report.units.is_empty() => break,
            Err(e) => return Err(e.into()),
        };
        let tag = ProtectedTag::new(record.public_string.clone(), record.private_tag.clone())
            .map_err(|_| RegistryError::InvalidParam("stored record is not a valid tag"))?;
        let printed = protect_tag(&tag, keys.seal, keys.conceal, cfg.ec_level, &mut seal_rng)?;
        let (captured, flipped) = distort(&printed, p, &mut smear);

        let t0 = clock();
        let seen = inspect(&captured, decoder, registry)?;
        report.decode_nanos.push(clock().saturating_sub(t0));

        // The decision applies to the dispensed unit on the line.
        match seen.decision {
            Decision::Accept => {
                registry.promote(&record.private_tag, at)?;
                report.accepted += 1;
            }
            Decision::Reject => {
                registry.reject(&record.private_tag, at)?;
                report.rejected += 1;
            }
        }
        report.units.push(UnitOutcome {
            seq: record.seq,
            tag: record.private_tag,
            flipped,
            decode_ok: seen.decode_ok,
            staging_hit: seen.staging_hit,
            decision: seen.decision,
            reason: seen.reason,
        });
    }
    Ok(report)
}
