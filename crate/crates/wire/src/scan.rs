//! Request and response bodies of the verification service.
//!
//! Every body is UTF-8 text, one `key=value` field per line, fields in the
//! order written here. `POST /v1/scans` carries the symbol file verbatim
//! after a bare `symbol` line.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::kv::{escape, split_fields, FieldReader};
use crate::WireError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerdictKind {
    Authentic,
    UnknownTag,
    DecodeFailure,
    DuplicateSuspect,
    LocationSuspect,
}

impl VerdictKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::Authentic => "AUTHENTIC",
            VerdictKind::UnknownTag => "UNKNOWN_TAG",
            VerdictKind::DecodeFailure => "DECODE_FAILURE",
            VerdictKind::DuplicateSuspect => "DUPLICATE_SUSPECT",
            VerdictKind::LocationSuspect => "LOCATION_SUSPECT",
        }
    }

    pub fn is_suspect(self) -> bool {
        matches!(self, VerdictKind::DuplicateSuspect | VerdictKind::LocationSuspect)
    }

    /// Whether a verdict of this kind carries product metadata.
    pub fn carries_product(self) -> bool {
        !matches!(self, VerdictKind::UnknownTag | VerdictKind::DecodeFailure)
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for VerdictKind {
    type Err = WireError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "AUTHENTIC" => VerdictKind::Authentic,
            "UNKNOWN_TAG" => VerdictKind::UnknownTag,
            "DECODE_FAILURE" => VerdictKind::DecodeFailure,
            "DUPLICATE_SUSPECT" => VerdictKind::DuplicateSuspect,
            "LOCATION_SUSPECT" => VerdictKind::LocationSuspect,
            _ => return Err(WireError::InvalidValue { field: "verdict", value: s.into() }),
        })
    }
}

/// Batch-level product metadata shown to an end user.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ProductMeta {
    pub name: String,
    pub batch_number: String,
    pub manufacturer: String,
    pub mfg_date: String,
    pub expiry_date: String,
}

impl ProductMeta {
    pub const FIELDS: [&'static str; 5] = ["name", "batch_number", "manufacturer", "mfg_date", "expiry_date"];

    pub fn values(&self) -> [&str; 5] {
        [&self.name, &self.batch_number, &self.manufacturer, &self.mfg_date, &self.expiry_date]
    }
}

fn body_fields(body: &str) -> Result<Vec<(String, String)>, WireError> {
    split_fields(body.lines().filter(|l| !l.is_empty()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRequest {
    pub device_id: String,
    pub region: String,
    pub lat: f64,
    pub lon: f64,
    /// Seconds since the Unix epoch, UTC, as reported by the client.
    pub timestamp: i64,
    /// `QRSYM` file text.
    pub symbol: String,
}

impl ScanRequest {
    pub fn to_body(&self) -> String {
        format!(
            "device_id={}\nregion={}\nlat={}\nlon={}\ntimestamp={}\nsymbol\n{}",
            escape(&self.device_id),
            escape(&self.region),
            self.lat,
            self.lon,
            self.timestamp,
            self.symbol
        )
    }

    pub fn parse(body: &str) -> Result<Self, WireError> {
        let (head, symbol) = body.split_once("\nsymbol\n").ok_or(WireError::MissingField("symbol"))?;
        let mut r = FieldReader::new(body_fields(head)?);
        let device_id = r.take("device_id")?;
        let region = r.take("region")?;
        let lat: f64 = r.take_parsed("lat")?;
        let lon: f64 = r.take_parsed("lon")?;
        let timestamp = r.take_parsed("timestamp")?;
        r.finish("scan request header")?;
        if device_id.is_empty() {
            return Err(WireError::InvalidValue { field: "device_id", value: device_id });
        }
        if !(-90.0..=90.0).contains(&lat) {
            return Err(WireError::InvalidValue { field: "lat", value: lat.to_string() });
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(WireError::InvalidValue { field: "lon", value: lon.to_string() });
        }
        Ok(Self { device_id, region, lat, lon, timestamp, symbol: symbol.into() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanResponse {
    pub verdict: VerdictKind,
    pub alerts: Vec<String>,
    pub product: Option<ProductMeta>,
}

impl ScanResponse {
    pub fn to_body(&self) -> String {
        let mut out = format!("verdict={}\n", self.verdict);
        for a in &self.alerts {
            let _ = writeln!(out, "alert={}", escape(a));
        }
        if let Some(p) = &self.product {
            for (k, v) in ProductMeta::FIELDS.iter().zip(p.values()) {
                let _ = writeln!(out, "product.{k}={}", escape(v));
            }
        }
        out
    }

    pub fn parse(body: &str) -> Result<Self, WireError> {
        let mut r = FieldReader::new(body_fields(body)?);
        let verdict = r.take_parsed("verdict")?;
        let mut alerts = Vec::new();
        while let Some(a) = r.take_opt("alert")? {
            alerts.push(a);
        }
        let product = if r.peek_key().is_some() {
            Some(ProductMeta {
                name: r.take("product.name")?,
                batch_number: r.take("product.batch_number")?,
                manufacturer: r.take("product.manufacturer")?,
                mfg_date: r.take("product.mfg_date")?,
                expiry_date: r.take("product.expiry_date")?,
            })
        } else {
            None
        };
        r.finish("scan response")?;
        Ok(Self { verdict, alerts, product })
    }

    /// Human-readable rendering used by the scan client.
    pub fn render(&self) -> String {
        let mut out = format!("verdict: {}\n", self.verdict);
        for a in &self.alerts {
            let _ = writeln!(out, "alert: {a}");
        }
        if let Some(p) = &self.product {
            for (k, v) in ProductMeta::FIELDS.iter().zip(p.values()) {
                let _ = writeln!(out, "{k}: {v}");
            }
        }
        out
    }
}

/// Body returned by the factory-internal `POST /v1/decode`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeResponse {
    Decoded { public: String, tag: String },
    Failed { stage: String },
}

impl DecodeResponse {
    pub fn to_body(&self) -> String {
        match self {
            DecodeResponse::Decoded { public, tag } => {
                format!("result=OK\npublic={}\ntag={}\n", escape(public), escape(tag))
            }
            DecodeResponse::Failed { stage } => {
                format!("result=DECODE_FAILURE\nstage={}\n", escape(stage))
            }
        }
    }

    pub fn parse(body: &str) -> Result<Self, WireError> {
        let mut r = FieldReader::new(body_fields(body)?);
        let result = r.take("result")?;
        let out = match result.as_str() {
            "OK" => DecodeResponse::Decoded { public: r.take("public")?, tag: r.take("tag")? },
            "DECODE_FAILURE" => DecodeResponse::Failed { stage: r.take("stage")? },
            _ => return Err(WireError::InvalidValue { field: "result", value: result }),
        };
        r.finish("decode response")?;
        Ok(out)
    }
}
