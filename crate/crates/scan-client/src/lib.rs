//! Client side of a verification scan.
//!
//! The client reads a `QRSYM` file, attaches device and location context,
//! and posts it to `/v1/scans`. It has no decoder and no key input: the
//! crate depends on the wire formats only.

use std::time::Duration;

use qrseal_wire::{ScanRequest, ScanResponse, SymbolFile, VerdictKind, WireError};

pub mod http;

pub const EXIT_AUTHENTIC: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_SUSPECT: u8 = 2;
pub const EXIT_UNVERIFIED: u8 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct ClientConfig {
    /// Base URL, e.g. `http://127.0.0.1:8080`.
    pub server: String,
    pub device_id: String,
    pub region: String,
    pub lat: f64,
    pub lon: f64,
    pub timeout: Duration,
}

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("device id must be non-empty")]
    EmptyDevice,
    #[error("symbol file: {0}")]
    BadSymbol(WireError),
    #[error("transport: {0}")]
    Transport(#[from] http::HttpError),
    #[error("server replied {status}: {body}")]
    Rejected { status: u16, body: String },
    #[error("unreadable server reply: {0}")]
    BadReply(WireError),
}

pub fn exit_code(v: VerdictKind) -> u8 {
    match v {
        VerdictKind::Authentic => EXIT_AUTHENTIC,
        VerdictKind::DuplicateSuspect | VerdictKind::LocationSuspect => EXIT_SUSPECT,
        VerdictKind::UnknownTag | VerdictKind::DecodeFailure => EXIT_UNVERIFIED,
    }
}

/// Builds the request body. The symbol text is checked only for shape.
pub fn build_request(
    cfg: &ClientConfig,
    symbol_text: &str,
    timestamp: i64,
) -> Result<ScanRequest, ScanError> {
    if cfg.device_id.is_empty() {
        return Err(ScanError::EmptyDevice);
    }
    SymbolFile::parse(symbol_text).map_err(ScanError::BadSymbol)?;
    Ok(ScanRequest {
        device_id: cfg.device_id.clone(),
        region: cfg.region.clone(),
        lat: cfg.lat,
        lon: cfg.lon,
        timestamp,
        symbol: symbol_text.into(),
    })
}

pub fn scan(cfg: &ClientConfig, symbol_text: &str, timestamp: i64) -> Result<ScanResponse, ScanError> {
    let req = build_request(cfg, symbol_text, timestamp)?;
    let url = format!("{}/v1/scans", cfg.server.trim_end_matches('/'));
    let (status, body) = http::post_text(&url, &req.to_body(), cfg.timeout)?;
    if status != 200 {
        return Err(ScanError::Rejected { status, body });
    }
    ScanResponse::parse(&body).map_err(ScanError::BadReply)
}
