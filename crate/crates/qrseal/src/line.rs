//! Running the QC line against a file-backed registry.

use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use qrseal_core::payload::ModificationKey;
use qrseal_core::pipeline::{DecodeOutcome, DecodeStage, DecodedTag, DecoderUnavailable, TagDecoder};
use qrseal_core::qc::{run_line, LineConfig, LineKeys, LineReport};
use qrseal_core::qr::QrSymbol;
use qrseal_core::seal::SealKey;
use qrseal_scan::http;
use qrseal_wire::DecodeResponse;

use crate::store::RegistryStore;

/// Decodes through a verification server's `/v1/decode`.
#[derive(Debug, Clone)]
pub struct RemoteDecoder {
    url: String,
    timeout: Duration,
}

impl RemoteDecoder {
    pub fn new(server: &str) -> Self {
        Self { url: format!("{}/v1/decode", server.trim_end_matches('/')), timeout: Duration::from_secs(10) }
    }
}

impl TagDecoder for RemoteDecoder {
    fn decode(&self, symbol: &QrSymbol) -> Result<DecodeOutcome, DecoderUnavailable> {
        let unavailable = |m: String| DecoderUnavailable(m);
        let (status, body) = http::post_text(&self.url, &symbol.to_file().to_text(), self.timeout)
            .map_err(|e| unavailable(e.to_string()))?;
        if status != 200 {
            return Err(unavailable(format!("{} replied {status}", self.url)));
        }
        match DecodeResponse::parse(&body).map_err(|e| unavailable(e.to_string()))? {
            DecodeResponse::Decoded { public, tag } => Ok(Ok(DecodedTag { public, private: tag })),
            DecodeResponse::Failed { stage } => Ok(Err(stage
                .parse::<DecodeStage>()
                .map_err(|_| unavailable(format!("unknown stage {stage:?}")))?)),
        }
    }
}

pub fn monotonic_clock() -> impl Fn() -> u64 {
    let origin = Instant::now();
    move || origin.elapsed().as_nanos() as u64
}

/// Runs the line and commits every registry transition it made, even
/// when the run stops early.
pub fn run_line_on_store(
    store: &mut RegistryStore,
    cfg: &LineConfig,
    seal: &SealKey,
    conceal: &ModificationKey,
    decoder: &dyn TagDecoder,
    at: i64,
) -> Result<LineReport> {
    let keys = LineKeys { seal, conceal };
    let clock = monotonic_clock();
    let result = run_line(cfg, store.registry_mut(), &keys, decoder, &clock, at);
    store.commit()?;
    result.with_context(|| format!("line run on batch {}", cfg.batch_id))
}
