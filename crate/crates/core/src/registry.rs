//! Staging and final stores for product units, rebuilt from an event log.
//!
//! Every mutation is expressed as an [`Event`], applied, and queued for
//! the caller to persist. Replaying the persisted lines through
//! [`Registry::replay`] runs the same `apply` path, so a reloaded registry
//! equals the one that wrote the log.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use qrseal_wire::kv::{FieldReader, LineWriter};
use qrseal_wire::{ProductMeta, WireError};
use rand_core::{CryptoRng, RngCore};

pub const TAG_LEN: usize = 11;
pub const BASE62: &[u8; 62] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("invalid parameter: {0}")]
    InvalidParam(&'static str),
    #[error("no such {0}")]
    NotFound(&'static str),
    #[error("batch {0} has no undispensed staged records")]
    BatchExhausted(String),
    #[error("tag {tag} is {from}, cannot move to {to}")]
    IllegalTransition { tag: String, from: RecordState, to: RecordState },
    #[error("event log line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("storage: {0}")]
    Storage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecordState {
    Staged,
    Accepted,
    Rejected,
}

impl RecordState {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordState::Staged => "STAGED",
            RecordState::Accepted => "ACCEPTED",
            RecordState::Rejected => "REJECTED",
        }
    }
}

impl fmt::Display for RecordState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a caller supplies when creating a batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchDescriptor {
    pub public_string: String,
    pub meta: ProductMeta,
    pub intended_regions: BTreeSet<String>,
    pub seal_key_id: String,
    pub conceal_key_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub batch_id: String,
    pub count: usize,
    pub descriptor: BatchDescriptor,
    pub created_at: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductRecord {
    pub private_tag: String,
    pub batch_id: String,
    pub seq: usize,
    pub public_string: String,
    pub product_meta: ProductMeta,
    pub intended_regions: BTreeSet<String>,
    pub state: RecordState,
    pub dispensed: bool,
    pub created_at: i64,
    pub promoted_at: Option<i64>,
    pub symbol_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Batch(Batch),
    Stage { batch_id: String, seq: usize, tag: String, at: i64 },
    Dispense { tag: String },
    Accept { tag: String, at: i64 },
    Reject { tag: String, at: i64 },
    Symbol { tag: String, path: String },
}

fn is_region_code(r: &str) -> bool {
    !r.is_empty() && r.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

fn join_regions(regions: &BTreeSet<String>) -> String {
    regions.iter().map(String::as_str).collect::<Vec<_>>().join(",")
}

fn wire(e: WireError) -> String {
    e.to_string()
}

impl Event {
    pub fn to_line(&self) -> String {
        match self {
            Event::Batch(b) => {
                let d = &b.descriptor;
                let mut w = LineWriter::new()
                    .field("event", "batch")
                    .field("batch", &b.batch_id)
                    .field("count", &b.count.to_string())
                    .field("public", &d.public_string);
                for (k, v) in ProductMeta::FIELDS.iter().zip(d.meta.values()) {
                    w = w.field(k, v);
                }
                w.field("regions", &join_regions(&d.intended_regions))
                    .field("seal_key", &d.seal_key_id)
                    .field("conceal_key", &d.conceal_key_id)
                    .field("at", &b.created_at.to_string())
                    .finish()
            }
            Event::Stage { batch_id, seq, tag, at } => LineWriter::new()
                .field("event", "stage")
                .field("batch", batch_id)
                .field("seq", &seq.to_string())
                .field("tag", tag)
                .field("at", &at.to_string())
                .finish(),
            Event::Dispense { tag } => {
                LineWriter::new().field("event", "dispense").field("tag", tag).finish()
            }
            Event::Accept { tag, at } | Event::Reject { tag, at } => LineWriter::new()
                .field("event", if matches!(self, Event::Accept { .. }) { "accept" } else { "reject" })
                .field("tag", tag)
                .field("at", &at.to_string())
                .finish(),
            Event::Symbol { tag, path } => {
                LineWriter::new().field("event", "symbol").field("tag", tag).field("path", path).finish()
            }
        }
    }

    pub fn parse(line: &str) -> Result<Self, String> {
        let mut r = FieldReader::from_line(line).map_err(wire)?;
        let kind = r.take("event").map_err(wire)?;
        let ev = match kind.as_str() {
            "batch" => {
                let batch_id = r.take("batch").map_err(wire)?;
                let count = r.take_parsed("count").map_err(wire)?;
                let public_string = r.take("public").map_err(wire)?;
                let meta = ProductMeta {
                    name: r.take("name").map_err(wire)?,
                    batch_number: r.take("batch_number").map_err(wire)?,
                    manufacturer: r.take("manufacturer").map_err(wire)?,
                    mfg_date: r.take("mfg_date").map_err(wire)?,
                    expiry_date: r.take("expiry_date").map_err(wire)?,
                };
                let regions = r.take("regions").map_err(wire)?;
                let intended_regions =
                    regions.split(',').filter(|s| !s.is_empty()).map(String::from).collect();
                Event::Batch(Batch {
                    batch_id,
                    count,
                    descriptor: BatchDescriptor {
                        public_string,
                        meta,
                        intended_regions,
                        seal_key_id: r.take("seal_key").map_err(wire)?,
                        conceal_key_id: r.take("conceal_key").map_err(wire)?,
                    },
                    created_at: r.take_parsed("at").map_err(wire)?,
                })
            }
            "stage" => Event::Stage {
                batch_id: r.take("batch").map_err(wire)?,
                seq: r.take_parsed("seq").map_err(wire)?,
                tag: r.take("tag").map_err(wire)?,
                at: r.take_parsed("at").map_err(wire)?,
            },
            "dispense" => Event::Dispense { tag: r.take("tag").map_err(wire)? },
            "accept" => {
                Event::Accept { tag: r.take("tag").map_err(wire)?, at: r.take_parsed("at").map_err(wire)? }
            }
            "reject" => {
                Event::Reject { tag: r.take("tag").map_err(wire)?, at: r.take_parsed("at").map_err(wire)? }
            }
            "symbol" => {
                Event::Symbol { tag: r.take("tag").map_err(wire)?, path: r.take("path").map_err(wire)? }
            }
            other => return Err(format!("unknown event {other:?}")),
        };
        r.finish("event").map_err(wire)?;
        Ok(ev)
    }
}

/// Draws one 11-character base-62 tag. Bytes ≥ 248 are discarded so every
/// character is uniform over the alphabet.
pub fn draw_tag<R: RngCore + CryptoRng>(rng: &mut R) -> String {
    let mut out = String::with_capacity(TAG_LEN);
    let mut buf = [0u8; 16];
    while out.len() < TAG_LEN {
        rng.fill_bytes(&mut buf);
        for &b in &buf {
            if b < 248 && out.len() < TAG_LEN {
                out.push(BASE62[(b % 62) as usize] as char);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registry {
    batches: BTreeMap<String, Batch>,
    records: BTreeMap<String, ProductRecord>,
    /// Tags of each batch in creation order.
    order: BTreeMap<String, Vec<String>>,
    pending: Vec<Event>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a registry from persisted event lines. Blank lines are skipped.
    pub fn replay<'a, I: IntoIterator<Item = &'a str>>(lines: I) -> Result<Self, RegistryError> {
        let mut reg = Self::new();
        for (i, line) in lines.into_iter().enumerate() {
            if line.is_empty() {
                continue;
            }
            let corrupt = |reason: String| RegistryError::Corrupt { line: i + 1, reason };
            let ev = Event::parse(line).map_err(corrupt)?;
            reg.apply(&ev).map_err(|e| corrupt(e.to_string()))?;
        }
        Ok(reg)
    }

    /// Events applied since the last drain, oldest first.
    pub fn drain_events(&mut self) -> Vec<Event> {
        core::mem::take(&mut self.pending)
    }

    pub fn has_pending(&self) -> bool {
        !self.pending.is_empty()
    }

    fn record_mut(&mut self, tag: &str) -> Result<&mut ProductRecord, RegistryError> {
        self.records.get_mut(tag).ok_or(RegistryError::NotFound("tag"))
    }

    fn apply(&mut self, ev: &Event) -> Result<(), RegistryError> {
        match ev {
            Event::Batch(b) => {
                if self.batches.contains_key(&b.batch_id) {
                    return Err(RegistryError::InvalidParam("duplicate batch id"));
                }
                self.order.insert(b.batch_id.clone(), Vec::with_capacity(b.count));
                self.batches.insert(b.batch_id.clone(), b.clone());
            }
            Event::Stage { batch_id, seq, tag, at } => {
                let batch = self.batches.get(batch_id).ok_or(RegistryError::NotFound("batch"))?;
                let order = self.order.get_mut(batch_id).expect("order tracks batches");
                if *seq != order.len() || *seq >= batch.count {
                    return Err(RegistryError::InvalidParam("out-of-order stage"));
                }
                if self.records.contains_key(tag) || tag.len() != TAG_LEN || !crate::payload::is_base62(tag) {
                    return Err(RegistryError::InvalidParam("tag"));
                }
                let d = &batch.descriptor;
                self.records.insert(
                    tag.clone(),
                    ProductRecord {
                        private_tag: tag.clone(),
                        batch_id: batch_id.clone(),
                        seq: *seq,
                        public_string: d.public_string.clone(),
                        product_meta: d.meta.clone(),
                        intended_regions: d.intended_regions.clone(),
                        state: RecordState::Staged,
                        dispensed: false,
                        created_at: *at,
                        promoted_at: None,
                        symbol_path: None,
                    },
                );
                order.push(tag.clone());
            }
            Event::Dispense { tag } => {
                let r = self.record_mut(tag)?;
                if r.state != RecordState::Staged || r.dispensed {
                    return Err(RegistryError::IllegalTransition {
                        tag: tag.clone(),
                        from: r.state,
                        to: r.state,
                    });
                }
                r.dispensed = true;
            }
            Event::Accept { tag, at } | Event::Reject { tag, at } => {
                let to = if matches!(ev, Event::Accept { .. }) {
                    RecordState::Accepted
                } else {
                    RecordState::Rejected
                };
                let r = self.record_mut(tag)?;
                if r.state != RecordState::Staged {
                    return Err(RegistryError::IllegalTransition { tag: tag.clone(), from: r.state, to });
                }
                r.state = to;
                r.promoted_at = Some(*at);
            }
            Event::Symbol { tag, path } => {
                self.record_mut(tag)?.symbol_path = Some(path.clone());
            }
        }
        Ok(())
    }

    fn emit(&mut self, ev: Event) -> Result<(), RegistryError> {
        self.apply(&ev)?;
        self.pending.push(ev);
        Ok(())
    }

    pub fn create_batch<R: RngCore + CryptoRng>(
        &mut self,
        descriptor: BatchDescriptor,
        count: usize,
        at: i64,
        rng: &mut R,
    ) -> Result<String, RegistryError> {
        if count == 0 {
            return Err(RegistryError::InvalidParam("count must be at least 1"));
        }
        if !crate::payload::is_printable_ascii(descriptor.public_string.as_bytes()) {
            return Err(RegistryError::InvalidParam("public string must be printable ASCII"));
        }
        if !descriptor.intended_regions.iter().all(|r| is_region_code(r)) {
            return Err(RegistryError::InvalidParam("region codes are [A-Za-z0-9_-]+"));
        }
        let batch_id = format!("B{:06}", self.batches.len() + 1);
        self.emit(Event::Batch(Batch { batch_id: batch_id.clone(), count, descriptor, created_at: at }))?;
        for seq in 0..count {
            let tag = loop {
                let t = draw_tag(rng);
                if !self.records.contains_key(&t) {
                    break t;
                }
            };
            self.emit(Event::Stage { batch_id: batch_id.clone(), seq, tag, at })?;
        }
        Ok(batch_id)
    }

    /// Hands out the lowest-sequence staged record not yet dispensed.
    pub fn next_unprinted(&mut self, batch_id: &str) -> Result<ProductRecord, RegistryError> {
        let order = self.order.get(batch_id).ok_or(RegistryError::NotFound("batch"))?;
        let tag = order
            .iter()
            .find(|t| {
                let r = &self.records[*t];
                r.state == RecordState::Staged && !r.dispensed
            })
            .cloned()
            .ok_or_else(|| RegistryError::BatchExhausted(batch_id.into()))?;
        self.emit(Event::Dispense { tag: tag.clone() })?;
        Ok(self.records[&tag].clone())
    }

    pub fn verify_staging(&self, tag: &str) -> Option<&ProductRecord> {
        self.records.get(tag).filter(|r| r.state == RecordState::Staged)
    }

    pub fn lookup_final(&self, tag: &str) -> Option<&ProductRecord> {
        self.records.get(tag).filter(|r| r.state == RecordState::Accepted)
    }

    pub fn promote(&mut self, tag: &str, at: i64) -> Result<ProductRecord, RegistryError> {
        self.emit(Event::Accept { tag: tag.into(), at })?;
        Ok(self.records[tag].clone())
    }

    pub fn reject(&mut self, tag: &str, at: i64) -> Result<ProductRecord, RegistryError> {
        self.emit(Event::Reject { tag: tag.into(), at })?;
        Ok(self.records[tag].clone())
    }

    pub fn set_symbol_path(&mut self, tag: &str, path: &str) -> Result<(), RegistryError> {
        self.emit(Event::Symbol { tag: tag.into(), path: path.into() })
    }

    pub fn batch(&self, batch_id: &str) -> Option<&Batch> {
        self.batches.get(batch_id)
    }

    pub fn batches(&self) -> impl Iterator<Item = &Batch> {
        self.batches.values()
    }

    /// Records of a batch in creation order.
    pub fn batch_records<'a>(&'a self, batch_id: &str) -> impl Iterator<Item = &'a ProductRecord> + 'a {
        self.order.get(batch_id).into_iter().flatten().map(move |t| &self.records[t])
    }

    pub fn records(&self) -> impl Iterator<Item = &ProductRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
