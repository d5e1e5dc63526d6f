//! Authentication of end-user scans against the final store.
//!
//! Verdict priority is `DUPLICATE_SUSPECT` over `LOCATION_SUSPECT` over
//! `AUTHENTIC`. Every rule that fires adds an alert, so a duplicate that is
//! also out of region reports both.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use qrseal_wire::kv::{FieldReader, LineWriter};
use qrseal_wire::{BatchIngest, IngestAck, ProductMeta, ScanRequest, ScanResponse, SymbolFile, VerdictKind};

use crate::pipeline::{decode_protected, TagKeys};
use crate::qr::QrSymbol;
use crate::registry::Registry;

pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    /// More scans than this in total is a duplicate signal.
    pub max_scans: usize,
    /// This many distinct devices is a duplicate signal.
    pub device_limit: usize,
    pub max_speed_kmh: f64,
    /// Location jitter below this distance never counts as travel.
    pub travel_slack_km: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { max_scans: 3, device_limit: 2, max_speed_kmh: 900.0, travel_slack_km: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalRecord {
    pub batch_id: String,
    pub public_string: String,
    pub meta: ProductMeta,
    pub regions: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("tag {tag} already ingested with different metadata")]
pub struct ConflictError {
    pub tag: String,
}

/// Accepted units as the verification service sees them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FinalStore {
    records: BTreeMap<String, FinalRecord>,
}

impl FinalStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every accepted record of a registry, as if each batch had been ingested.
    pub fn from_registry(reg: &Registry) -> Self {
        let records = reg
            .records()
            .filter_map(|r| reg.lookup_final(&r.private_tag))
            .map(|r| {
                (
                    r.private_tag.clone(),
                    FinalRecord {
                        batch_id: r.batch_id.clone(),
                        public_string: r.public_string.clone(),
                        meta: r.product_meta.clone(),
                        regions: r.intended_regions.clone(),
                    },
                )
            })
            .collect();
        Self { records }
    }

    /// All-or-nothing: a conflict on any tag leaves the store untouched.
    pub fn ingest(&mut self, batch: &BatchIngest) -> Result<IngestAck, ConflictError> {
        let rec = FinalRecord {
            batch_id: batch.batch_id.clone(),
            public_string: batch.public_string.clone(),
            meta: batch.meta.clone(),
            regions: batch.regions.iter().cloned().collect(),
        };
        let mut fresh = BTreeSet::new();
        let mut unchanged = 0;
        for tag in &batch.tags {
            match self.records.get(tag) {
                Some(existing) if *existing == rec => unchanged += 1,
                Some(_) => return Err(ConflictError { tag: tag.clone() }),
                None => {
                    if !fresh.insert(tag.as_str()) {
                        unchanged += 1;
                    }
                }
            }
        }
        let added = fresh.len();
        for tag in fresh {
            self.records.insert(tag.into(), rec.clone());
        }
        Ok(IngestAck { added, unchanged })
    }

    pub fn get(&self, tag: &str) -> Option<&FinalRecord> {
        self.records.get(tag)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Where and when a scan happened, as reported by the client.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanContext {
    pub device_id: String,
    pub region: String,
    pub lat: f64,
    pub lon: f64,
    pub timestamp: i64,
}

impl ScanContext {
    pub fn from_request(req: &ScanRequest) -> Self {
        Self {
            device_id: req.device_id.clone(),
            region: req.region.clone(),
            lat: req.lat,
            lon: req.lon,
            timestamp: req.timestamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanEvent {
    /// Resolved private tag; `None` when decoding failed.
    pub tag: Option<String>,
    pub context: ScanContext,
    pub verdict: VerdictKind,
}

impl ScanEvent {
    pub fn to_line(&self) -> String {
        let c = &self.context;
        let mut w = LineWriter::new().field("event", "scan");
        if let Some(t) = &self.tag {
            w = w.field("tag", t);
        }
        w.field("device", &c.device_id)
            .field("region", &c.region)
            .field("lat", &c.lat.to_string())
            .field("lon", &c.lon.to_string())
            .field("ts", &c.timestamp.to_string())
            .field("verdict", self.verdict.as_str())
            .finish()
    }

    pub fn parse(line: &str) -> Result<Self, qrseal_wire::WireError> {
        let mut r = FieldReader::from_line(line)?;
        let kind = r.take("event")?;
        if kind != "scan" {
            return Err(qrseal_wire::WireError::InvalidValue { field: "event", value: kind });
        }
        let ev = Self {
            tag: r.take_opt("tag")?,
            context: ScanContext {
                device_id: r.take("device")?,
                region: r.take("region")?,
                lat: r.take_parsed("lat")?,
                lon: r.take_parsed("lon")?,
                timestamp: r.take_parsed("ts")?,
            },
            verdict: r.take_parsed("verdict")?,
        };
        r.finish("scan event")?;
        Ok(ev)
    }
}

/// Great-circle distance in kilometres.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = libm::pow(libm::sin(dp / 2.0), 2.0)
        + libm::cos(p1) * libm::cos(p2) * libm::pow(libm::sin(dl / 2.0), 2.0);
    2.0 * EARTH_RADIUS_KM * libm::asin(libm::sqrt(h.min(1.0)))
}

/// The rule table. `history` is every earlier scan of the same tag.
pub fn classify_scan(
    history: &[ScanEvent],
    record: &FinalRecord,
    incoming: &ScanContext,
    cfg: &VerifyConfig,
) -> (VerdictKind, Vec<String>) {
    let mut alerts = Vec::new();
    let mut duplicate = false;

    let devices: BTreeSet<&str> =
        history.iter().map(|e| e.context.device_id.as_str()).chain([incoming.device_id.as_str()]).collect();
    if devices.len() >= cfg.device_limit {
        duplicate = true;
        alerts.push(format!("scanned from {} distinct devices", devices.len()));
    }
    let total = history.len() + 1;
    if total > cfg.max_scans {
        duplicate = true;
        alerts.push(format!("scanned {total} times, limit is {}", cfg.max_scans));
    }
    for prior in history {
        let p = &prior.context;
        let km = haversine_km(p.lat, p.lon, incoming.lat, incoming.lon);
        if km <= cfg.travel_slack_km {
            continue;
        }
        let secs = (incoming.timestamp - p.timestamp).unsigned_abs();
        let too_fast = secs == 0 || km * 3600.0 / secs as f64 > cfg.max_speed_kmh;
        if too_fast {
            duplicate = true;
            alerts.push(format!("impossible travel: {km:.0} km in {secs} s"));
            break;
        }
    }

    let location = !record.regions.contains(&incoming.region);
    if location {
        alerts.push(format!(
            "scanned in region {}, outside the product's distribution regions",
            incoming.region
        ));
    }

    let same_device = history.iter().filter(|e| e.context.device_id == incoming.device_id).count();
    if !duplicate && same_device > 0 {
        alerts.push(format!("repeat scan {} of {} from this device", same_device + 1, cfg.max_scans));
    }

    let kind = if duplicate {
        VerdictKind::DuplicateSuspect
    } else if location {
        VerdictKind::LocationSuspect
    } else {
        VerdictKind::Authentic
    };
    (kind, alerts)
}

const UNKNOWN_ALERT: &str = "tag is not registered; possible counterfeit";
const DECODE_ALERT: &str = "symbol could not be read as a protected code";

/// Service state: final store plus per-tag scan history.
#[derive(Debug, Clone, Default)]
pub struct VerifyService {
    pub config: VerifyConfig,
    store: FinalStore,
    history: BTreeMap<String, Vec<ScanEvent>>,
    pending: Vec<ScanEvent>,
}

impl VerifyService {
    pub fn new(config: VerifyConfig, store: FinalStore) -> Self {
        Self { config, store, history: BTreeMap::new(), pending: Vec::new() }
    }

    pub fn store(&self) -> &FinalStore {
        &self.store
    }

    pub fn ingest(&mut self, batch: &BatchIngest) -> Result<IngestAck, ConflictError> {
        self.store.ingest(batch)
    }

    /// Loads recorded events as history without re-classifying them.
    pub fn load_history(&mut self, events: impl IntoIterator<Item = ScanEvent>) {
        for ev in events {
            if let Some(t) = &ev.tag {
                self.history.entry(t.clone()).or_default().push(ev);
            }
        }
    }

    pub fn history(&self, tag: &str) -> &[ScanEvent] {
        self.history.get(tag).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn drain_events(&mut self) -> Vec<ScanEvent> {
        core::mem::take(&mut self.pending)
    }

    fn record(&mut self, ev: ScanEvent) {
        if let Some(t) = &ev.tag {
            self.history.entry(t.clone()).or_default().push(ev.clone());
        }
        self.pending.push(ev);
    }

    /// The protected decode alone; needs no service state.
    pub fn resolve_tag(symbol: &SymbolFile, keys: &TagKeys) -> Option<String> {
        let sym = QrSymbol::from_file(symbol.clone()).ok()?;
        decode_protected(&sym.modules, keys).ok().map(|d| d.private)
    }

    /// Classifies one scan whose tag has been resolved (`None` if the
    /// decode failed) and appends its event, whatever the verdict.
    pub fn handle_resolved(&mut self, ctx: ScanContext, tag: Option<String>) -> ScanResponse {
        let Some(tag) = tag else {
            self.record(ScanEvent { tag: None, context: ctx, verdict: VerdictKind::DecodeFailure });
            return ScanResponse {
                verdict: VerdictKind::DecodeFailure,
                alerts: alloc::vec![DECODE_ALERT.into()],
                product: None,
            };
        };
        let Some(record) = self.store.get(&tag) else {
            self.record(ScanEvent { tag: Some(tag), context: ctx, verdict: VerdictKind::UnknownTag });
            return ScanResponse {
                verdict: VerdictKind::UnknownTag,
                alerts: alloc::vec![UNKNOWN_ALERT.into()],
                product: None,
            };
        };
        let (verdict, alerts) = classify_scan(self.history(&tag), record, &ctx, &self.config);
        let product = Some(record.meta.clone());
        self.record(ScanEvent { tag: Some(tag), context: ctx, verdict });
        ScanResponse { verdict, alerts, product }
    }

    pub fn handle_scan(&mut self, ctx: ScanContext, symbol: &SymbolFile, keys: &TagKeys) -> ScanResponse {
        let tag = Self::resolve_tag(symbol, keys);
        self.handle_resolved(ctx, tag)
    }
}

#[cfg(test)]
mod tests;
