use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use qrseal_wire::EcLevel;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use super::*;
use crate::payload::{ModificationKey, ProtectedTag};
use crate::pipeline::protect_tag;
use crate::seal::{generate_keypair, KeyPair, Scheme};

struct World {
    pair: KeyPair,
    keys: TagKeys,
    rng: ChaCha20Rng,
}

impl World {
    fn new() -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(404);
        let pair = generate_keypair(Scheme::RsaDemo, 512, &mut rng).unwrap();
        let conceal = ModificationKey::new(*b"verify-tests-key").unwrap();
        let keys = TagKeys { open: pair.private.clone(), conceal };
        Self { pair, keys, rng }
    }

    fn symbol(&mut self, tag: &str) -> SymbolFile {
        let t = ProtectedTag::new("Hello World!", tag).unwrap();
        protect_tag(&t, &self.pair.public, &self.keys.conceal, EcLevel::Q, &mut self.rng).unwrap().to_file()
    }
}

fn meta() -> ProductMeta {
    ProductMeta {
        name: "Napa 500".into(),
        batch_number: "BN-7".into(),
        manufacturer: "Acme Pharma".into(),
        mfg_date: "2024-01-01".into(),
        expiry_date: "2026-01-01".into(),
    }
}

fn ingest(tags: &[&str]) -> BatchIngest {
    BatchIngest {
        batch_id: "B000001".into(),
        public_string: "Hello World!".into(),
        meta: meta(),
        regions: vec!["BD".into(), "IN".into()],
        tags: tags.iter().map(|t| String::from(*t)).collect(),
    }
}

fn ctx(device: &str, region: &str, lat: f64, lon: f64, ts: i64) -> ScanContext {
    ScanContext { device_id: device.into(), region: region.into(), lat, lon, timestamp: ts }
}

fn dhaka(device: &str, ts: i64) -> ScanContext {
    ctx(device, "BD", 23.8103, 90.4125, ts)
}

fn service(tags: &[&str]) -> VerifyService {
    let mut s = VerifyService::new(VerifyConfig::default(), FinalStore::new());
    s.ingest(&ingest(tags)).unwrap();
    s
}

/// Angle from the chord between unit vectors; independent of the haversine form.
fn oracle_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let v = |lat: f64, lon: f64| {
        let (la, lo) = (lat.to_radians(), lon.to_radians());
        [libm::cos(la) * libm::cos(lo), libm::cos(la) * libm::sin(lo), libm::sin(la)]
    };
    let (a, b) = (v(lat1, lon1), v(lat2, lon2));
    let chord = libm::sqrt((0..3).map(|i| (a[i] - b[i]) * (a[i] - b[i])).sum());
    2.0 * libm::asin(chord / 2.0) * EARTH_RADIUS_KM
}

#[test]
fn haversine_matches_chord_oracle() {
    let deg = core::f64::consts::PI / 180.0 * EARTH_RADIUS_KM;
    assert!((haversine_km(0.0, 0.0, 0.0, 1.0) - deg).abs() < 1e-9);
    assert!((haversine_km(0.0, 0.0, 0.0, 180.0) - deg * 180.0).abs() < 1e-6);
    let mut r = ChaCha20Rng::seed_from_u64(1);
    let mut unit = || (r.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    for _ in 0..1000 {
        let (a, b, c, d) =
            (unit() * 180.0 - 90.0, unit() * 360.0 - 180.0, unit() * 180.0 - 90.0, unit() * 360.0 - 180.0);
        let (h, o) = (haversine_km(a, b, c, d), oracle_km(a, b, c, d));
        assert!((h - o).abs() < 1e-6, "{h} vs {o}");
    }
}

#[test]
fn anomaly_scenario() {
    let mut w = World::new();
    let mut s = service(&["TTTTTTTTTTT", "UUUUUUUUUUU"]);
    let t = w.symbol("TTTTTTTTTTT");
    let u = w.symbol("UUUUUUUUUUU");
    let x = w.symbol("XXXXXXXXXXX");

    let r = s.handle_scan(dhaka("A", 1000), &t, &w.keys);
    assert_eq!((r.verdict, r.alerts.len()), (VerdictKind::Authentic, 0));
    assert_eq!(r.product, Some(meta()));

    let r = s.handle_scan(dhaka("B", 5000), &t, &w.keys);
    assert_eq!(r.verdict, VerdictKind::DuplicateSuspect);
    assert_eq!(r.alerts, ["scanned from 2 distinct devices"]);
    assert_eq!(r.product, Some(meta()));

    let r = s.handle_scan(ctx("C", "FR", 48.85, 2.35, 1000), &u, &w.keys);
    assert_eq!(r.verdict, VerdictKind::LocationSuspect);
    assert_eq!(r.alerts, ["scanned in region FR, outside the product's distribution regions"]);

    let r = s.handle_scan(dhaka("D", 1000), &x, &w.keys);
    assert_eq!(r.verdict, VerdictKind::UnknownTag);
    assert_eq!(r.product, None);

    let events = s.drain_events();
    assert_eq!(events.len(), 4);
    assert_eq!(events[3].tag.as_deref(), Some("XXXXXXXXXXX"));
}

#[test]
fn decode_failures_are_verdicts() {
    let mut w = World::new();
    let mut s = service(&["TTTTTTTTTTT"]);
    let mut sym = w.symbol("TTTTTTTTTTT");
    let mut r = ChaCha20Rng::seed_from_u64(2);
    for m in sym.modules.iter_mut() {
        if r.next_u32() % 3 == 0 {
            *m = !*m;
        }
    }
    let resp = s.handle_scan(dhaka("A", 0), &sym, &w.keys);
    assert_eq!((resp.verdict, resp.product), (VerdictKind::DecodeFailure, None));

    // A side no supported version has.
    let big = SymbolFile { version: 40, ec: EcLevel::L, mask: 0, side: 177, modules: vec![false; 177 * 177] };
    assert_eq!(s.handle_scan(dhaka("A", 0), &big, &w.keys).verdict, VerdictKind::DecodeFailure);
    let ev = s.drain_events();
    assert!(ev.iter().all(|e| e.tag.is_none() && e.verdict == VerdictKind::DecodeFailure));
    assert!(s.history("TTTTTTTTTTT").is_empty());
}

#[test]
fn repeat_scans_from_one_device() {
    let mut w = World::new();
    let mut s = service(&["TTTTTTTTTTT"]);
    let t = w.symbol("TTTTTTTTTTT");
    let verdicts: Vec<_> = (0..4).map(|i| s.handle_scan(dhaka("A", 100 * i), &t, &w.keys)).collect();
    assert_eq!(verdicts[0].verdict, VerdictKind::Authentic);
    assert_eq!(verdicts[1].verdict, VerdictKind::Authentic);
    assert_eq!(verdicts[1].alerts, ["repeat scan 2 of 3 from this device"]);
    assert_eq!(verdicts[2].alerts, ["repeat scan 3 of 3 from this device"]);
    assert_eq!(verdicts[3].verdict, VerdictKind::DuplicateSuspect);
    assert_eq!(verdicts[3].alerts, ["scanned 4 times, limit is 3"]);
}

#[test]
fn impossible_travel() {
    let rec = FinalRecord {
        batch_id: "B".into(),
        public_string: String::new(),
        meta: meta(),
        regions: ["BD", "FR"].into_iter().map(String::from).collect(),
    };
    let cfg = VerifyConfig::default();
    let first = ScanEvent { tag: Some("T".into()), context: dhaka("A", 0), verdict: VerdictKind::Authentic };
    let paris = |ts| ctx("A", "FR", 48.85, 2.35, ts);
    // About 7970 km: eight hours is too fast, eleven is not.
    let (k, a) = classify_scan(core::slice::from_ref(&first), &rec, &paris(8 * 3600), &cfg);
    assert_eq!(k, VerdictKind::DuplicateSuspect);
    assert!(a[0].starts_with("impossible travel: 7"), "{a:?}");
    let (k, _) = classify_scan(core::slice::from_ref(&first), &rec, &paris(11 * 3600), &cfg);
    assert_eq!(k, VerdictKind::Authentic);
    // Timestamps are not trusted to be monotonic.
    let (k, _) = classify_scan(core::slice::from_ref(&first), &rec, &paris(-8 * 3600), &cfg);
    assert_eq!(k, VerdictKind::DuplicateSuspect);
    let (k, a) = classify_scan(core::slice::from_ref(&first), &rec, &paris(0), &cfg);
    assert_eq!(k, VerdictKind::DuplicateSuspect);
    assert!(a[0].ends_with(" in 0 s"));
    // GPS jitter at the same spot is not travel.
    let (k, _) = classify_scan(&[first], &rec, &ctx("A", "BD", 23.8105, 90.4126, 0), &cfg);
    assert_eq!(k, VerdictKind::Authentic);
}

#[test]
fn duplicate_outranks_location() {
    let rec = FinalRecord {
        batch_id: "B".into(),
        public_string: String::new(),
        meta: meta(),
        regions: Default::default(),
    };
    let prior = ScanEvent { tag: None, context: dhaka("A", 0), verdict: VerdictKind::LocationSuspect };
    let (k, a) = classify_scan(&[prior], &rec, &dhaka("B", 10_000), &VerifyConfig::default());
    assert_eq!(k, VerdictKind::DuplicateSuspect);
    assert_eq!(a.len(), 2);
}

#[test]
fn ingest_idempotent_and_conflicts() {
    let mut store = FinalStore::new();
    assert_eq!(store.ingest(&ingest(&["AAA", "BBB"])).unwrap(), IngestAck { added: 2, unchanged: 0 });
    let snapshot = store.clone();
    assert_eq!(store.ingest(&ingest(&["AAA", "BBB"])).unwrap(), IngestAck { added: 0, unchanged: 2 });
    assert_eq!(store, snapshot);

    let mut other = ingest(&["CCC", "AAA"]);
    other.meta.expiry_date = "2030-01-01".into();
    assert_eq!(store.ingest(&other), Err(ConflictError { tag: "AAA".into() }));
    assert_eq!(store, snapshot);
    assert!(store.get("CCC").is_none());
}

#[test]
fn scan_event_lines_roundtrip() {
    for ev in [
        ScanEvent {
            tag: Some("KauHRusHAsm".into()),
            context: dhaka("dev\t1", 17),
            verdict: VerdictKind::Authentic,
        },
        ScanEvent {
            tag: None,
            context: ctx("d", "ZZ", -33.5, 151.25, -4),
            verdict: VerdictKind::DecodeFailure,
        },
    ] {
        let line = ev.to_line();
        assert!(!line.contains('\n'));
        assert_eq!(ScanEvent::parse(&line).unwrap(), ev);
    }
    assert_eq!(
        ScanEvent { tag: Some("T".into()), context: dhaka("A", 5), verdict: VerdictKind::Authentic }
            .to_line(),
        "event=scan\ttag=T\tdevice=A\tregion=BD\tlat=23.8103\tlon=90.4125\tts=5\tverdict=AUTHENTIC"
    );
}

fn scripted(tags: &[&str]) -> Vec<(usize, ScanContext)> {
    let mut r = ChaCha20Rng::seed_from_u64(9);
    (0..40)
        .map(|i| {
            let t = (r.next_u32() as usize) % tags.len();
            let dev = ["A", "B", "C"][(r.next_u32() % 3) as usize];
            let region = ["BD", "IN", "FR"][(r.next_u32() % 3) as usize];
            (t, ctx(dev, region, 20.0 + (i % 5) as f64, 90.0, i as i64 * 600))
        })
        .collect()
}

#[test]
fn replayed_log_reproduces_verdicts() {
    let mut w = World::new();
    let tags = ["T0000000000", "T0000000001", "T0000000002"];
    let syms: Vec<_> = tags.iter().map(|t| w.symbol(t)).collect();
    let mut s = service(&tags);
    for (t, c) in scripted(&tags) {
        s.handle_scan(c, &syms[t], &w.keys);
    }
    let lines: Vec<String> = s.drain_events().iter().map(ScanEvent::to_line).collect();

    // Re-derive each verdict from the parsed history alone.
    let store = s.store().clone();
    let mut replay = VerifyService::new(VerifyConfig::default(), store.clone());
    for line in &lines {
        let ev = ScanEvent::parse(line).unwrap();
        let tag = ev.tag.clone().unwrap();
        let (kind, _) =
            classify_scan(replay.history(&tag), store.get(&tag).unwrap(), &ev.context, &replay.config);
        assert_eq!(kind, ev.verdict);
        replay.load_history([ev]);
    }
}

#[test]
fn interleaving_distinct_tags_keeps_per_tag_results() {
    let mut w = World::new();
    let tags = ["T0000000000", "T0000000001", "T0000000002", "T0000000003"];
    let syms: Vec<_> = tags.iter().map(|t| w.symbol(t)).collect();
    let script = scripted(&tags);
    let per_tag = |order: &[usize]| {
        let mut s = service(&tags);
        let mut out: Vec<Vec<(VerdictKind, Vec<String>)>> = vec![Vec::new(); tags.len()];
        for &i in order {
            let (t, c) = &script[i];
            let r = s.handle_scan(c.clone(), &syms[*t], &w.keys);
            out[*t].push((r.verdict, r.alerts));
        }
        out
    };
    let sequential: Vec<usize> = (0..script.len()).collect();
    let expected = per_tag(&sequential);
    let mut r = ChaCha20Rng::seed_from_u64(10);
    for _ in 0..20 {
        // Random merge of the per-tag queues: order within each tag is kept.
        let mut queues: Vec<Vec<usize>> = vec![Vec::new(); tags.len()];
        for (i, (t, _)) in script.iter().enumerate() {
            queues[*t].push(i);
        }
        queues.iter_mut().for_each(|q| q.reverse());
        let mut order = Vec::new();
        while queues.iter().any(|q| !q.is_empty()) {
            let live: Vec<usize> = (0..queues.len()).filter(|&i| !queues[i].is_empty()).collect();
            let pick = live[(r.next_u32() as usize) % live.len()];
            order.push(queues[pick].pop().unwrap());
        }
        assert_eq!(per_tag(&order), expected);
    }
}

#[test]
fn responses_carry_no_key_material() {
    let mut w = World::new();
    let mut s = service(&["TTTTTTTTTTT"]);
    let t = w.symbol("TTTTTTTTTTT");
    let crate::seal::OpenKey::Rsa(private) = &w.keys.open else { panic!() };
    let d = format!("{:x}", private.exponent());
    for dev in ["A", "B"] {
        let body = s.handle_scan(dhaka(dev, 0), &t, &w.keys).to_body();
        assert!(!body.contains(&d[..12]));
        assert!(!body.contains("verify-tests-key"));
    }
}
