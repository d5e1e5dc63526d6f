//! Wire and file formats for qrseal.
//!
//! Nothing in this crate knows how a QR symbol is decoded or how a private
//! tag is protected. It only moves text around: the `QRSYM` module-matrix
//! file, the canonical `key=value` escaping used by every log and report,
//! and the request/response bodies exchanged with the verification service.
//! Scan clients link against this crate alone.

#![no_std]

extern crate alloc;

pub mod ingest;
pub mod kv;
pub mod scan;
pub mod symbol_file;

mod error;

pub use error::WireError;
pub use ingest::{BatchIngest, IngestAck};
pub use scan::{DecodeResponse, ProductMeta, ScanRequest, ScanResponse, VerdictKind};
pub use symbol_file::{EcLevel, SymbolFile};
