//! File-backed registry, key storage, QC line runner and verification
//! server built on `qrseal-core`.

pub mod keys;
pub mod line;
pub mod logfile;
pub mod server;
pub mod store;

pub fn unix_now() -> i64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0)
}
