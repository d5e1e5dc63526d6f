//! Production data pushed from the factory to the verification service
//! (`POST /v1/batches`).
//!
//! ```text
//! batch_id=B000001
//! public=Hello World!
//! product.name=...            (five product.* fields)
//! region=EU                   (zero or more)
//! tag=KauHRusHAsm             (one or more)
//! ```

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::kv::{escape, split_fields, FieldReader};
use crate::{ProductMeta, WireError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchIngest {
    pub batch_id: String,
    pub public_string: String,
    pub meta: ProductMeta,
    /// Sorted, without duplicates.
    pub regions: Vec<String>,
    pub tags: Vec<String>,
}

impl BatchIngest {
    pub fn to_body(&self) -> String {
        let mut out =
            format!("batch_id={}\npublic={}\n", escape(&self.batch_id), escape(&self.public_string));
        for (k, v) in ProductMeta::FIELDS.iter().zip(self.meta.values()) {
            let _ = writeln!(out, "product.{k}={}", escape(v));
        }
        for r in &self.regions {
            let _ = writeln!(out, "region={}", escape(r));
        }
        for t in &self.tags {
            let _ = writeln!(out, "tag={}", escape(t));
        }
        out
    }

    pub fn parse(body: &str) -> Result<Self, WireError> {
        let mut r = FieldReader::new(split_fields(body.lines().filter(|l| !l.is_empty()))?);
        let batch_id = r.take("batch_id")?;
        let public_string = r.take("public")?;
        let meta = ProductMeta {
            name: r.take("product.name")?,
            batch_number: r.take("product.batch_number")?,
            manufacturer: r.take("product.manufacturer")?,
            mfg_date: r.take("product.mfg_date")?,
            expiry_date: r.take("product.expiry_date")?,
        };
        let mut regions = Vec::new();
        while let Some(reg) = r.take_opt("region")? {
            regions.push(reg);
        }
        let mut tags = Vec::new();
        while let Some(t) = r.take_opt("tag")? {
            tags.push(t);
        }
        r.finish("batch ingest")?;
        if batch_id.is_empty() {
            return Err(WireError::InvalidValue { field: "batch_id", value: batch_id });
        }
        if tags.is_empty() {
            return Err(WireError::MissingField("tag"));
        }
        if let Some(t) = tags.iter().find(|t| t.is_empty() || !t.bytes().all(|b| b.is_ascii_alphanumeric())) {
            return Err(WireError::InvalidValue { field: "tag", value: t.clone() });
        }
        regions.sort();
        regions.dedup();
        Ok(Self { batch_id, public_string, meta, regions, tags })
    }
}

/// Reply to a successful ingest. A repeated ingest reports every tag as unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestAck {
    pub added: usize,
    pub unchanged: usize,
}

impl IngestAck {
    pub fn to_body(&self) -> String {
        format!("result=OK\nadded={}\nunchanged={}\n", self.added, self.unchanged)
    }

    pub fn parse(body: &str) -> Result<Self, WireError> {
        let mut r = FieldReader::new(split_fields(body.lines().filter(|l| !l.is_empty()))?);
        let result = r.take("result")?;
        if result != "OK" {
            return Err(WireError::InvalidValue { field: "result", value: result });
        }
        let added = r.take_parsed("added")?;
        let unchanged = r.take_parsed("unchanged")?;
        r.finish("ingest ack")?;
        Ok(Self { added, unchanged })
    }
}

/// Body of a `409 Conflict` reply.
pub fn conflict_body(tag: &str) -> String {
    format!("result=CONFLICT\ntag={}\n", escape(tag))
}
