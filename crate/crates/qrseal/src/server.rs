//! The verification HTTP service.
//!
//! | route             | body in            | body out                     |
//! |-------------------|--------------------|------------------------------|
//! | `POST /v1/scans`  | scan request       | scan response                |
//! | `POST /v1/batches`| batch ingest       | ingest ack, or 409 conflict  |
//! | `POST /v1/decode` | `QRSYM` text       | decode response              |
//! | `GET /v1/health`  | none               | `status=OK`                  |
//!
//! Malformed bodies get `400` with an `error=` line. A symbol that does
//! not decode is a verdict (`DECODE_FAILURE`), not a protocol error.
//!
//! State lives in the data directory: accepted records of `events.log`
//! seed the final store, `ingest.log` holds pushed batches and `scans.log`
//! every scan event. Writes go through one mutex, so events are appended
//! in the order their verdicts were computed.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread;

use anyhow::{Context, Result};
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use qrseal_core::pipeline::{decode_protected, TagKeys};
use qrseal_core::qr::QrSymbol;
use qrseal_core::verify::{FinalStore, ScanContext, ScanEvent, VerifyConfig, VerifyService};
use qrseal_wire::ingest::conflict_body;
use qrseal_wire::kv::{escape, FieldReader, LineWriter};
use qrseal_wire::{BatchIngest, DecodeResponse, ScanRequest, SymbolFile};
use tokio::sync::oneshot;

use crate::logfile::{read_lines, AppendLog};
use crate::store::RegistryStore;

pub const INGEST_LOG: &str = "ingest.log";
pub const SCANS_LOG: &str = "scans.log";

struct Inner {
    service: VerifyService,
    scans: AppendLog,
    ingests: AppendLog,
}

pub struct AppState {
    keys: TagKeys,
    inner: Mutex<Inner>,
}

fn ingest_line(body: &str) -> String {
    LineWriter::new().field("event", "ingest").field("body", body).finish()
}

fn parse_ingest_line(line: &str) -> Result<BatchIngest> {
    let mut r = FieldReader::from_line(line)?;
    anyhow::ensure!(r.take("event")? == "ingest", "not an ingest event");
    let body = r.take("body")?;
    r.finish("ingest event")?;
    Ok(BatchIngest::parse(&body)?)
}

impl AppState {
    /// Rebuilds service state from the data directory.
    pub fn load(data_dir: &Path, keys: TagKeys, config: VerifyConfig) -> Result<Arc<Self>> {
        let mut store = FinalStore::from_registry(&RegistryStore::snapshot(data_dir)?);
        let ingest_path = data_dir.join(INGEST_LOG);
        for (i, line) in read_lines(&ingest_path)?.iter().enumerate() {
            let batch = parse_ingest_line(line)
                .with_context(|| format!("{} line {}", ingest_path.display(), i + 1))?;
            store.ingest(&batch)?;
        }
        let mut service = VerifyService::new(config, store);
        let scans_path = data_dir.join(SCANS_LOG);
        let mut events = Vec::new();
        for (i, line) in read_lines(&scans_path)?.iter().enumerate() {
            events.push(
                ScanEvent::parse(line).with_context(|| format!("{} line {}", scans_path.display(), i + 1))?,
            );
        }
        service.load_history(events);
        Ok(Arc::new(Self {
            keys,
            inner: Mutex::new(Inner {
                service,
                scans: AppendLog::open(scans_path)?,
                ingests: AppendLog::open(ingest_path)?,
            }),
        }))
    }

    pub fn final_records(&self) -> usize {
        self.inner.lock().unwrap().service.store().len()
    }
}

fn text(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "text/plain; charset=utf-8")], body).into_response()
}

fn bad_request(msg: impl std::fmt::Display) -> Response {
    text(StatusCode::BAD_REQUEST, format!("error={}\n", escape(&msg.to_string())))
}

fn internal(msg: impl std::fmt::Display) -> Response {
    text(StatusCode::INTERNAL_SERVER_ERROR, format!("error={}\n", escape(&msg.to_string())))
}

async fn scans(State(st): State<Arc<AppState>>, body: String) -> Response {
    let req = match ScanRequest::parse(&body) {
        Ok(r) => r,
        Err(e) => return bad_request(e),
    };
    let symbol = match SymbolFile::parse(&req.symbol) {
        Ok(s) => s,
        Err(e) => return bad_request(e),
    };
    let tag = VerifyService::resolve_tag(&symbol, &st.keys);
    let mut inner = st.inner.lock().unwrap();
    let resp = inner.service.handle_resolved(ScanContext::from_request(&req), tag);
    let events = inner.service.drain_events();
    if let Err(e) = inner.scans.append(events.iter().map(ScanEvent::to_line)) {
        return internal(e);
    }
    text(StatusCode::OK, resp.to_body())
}

async fn batches(State(st): State<Arc<AppState>>, body: String) -> Response {
    let batch = match BatchIngest::parse(&body) {
        Ok(b) => b,
        Err(e) => return bad_request(e),
    };
    let mut inner = st.inner.lock().unwrap();
    match inner.service.ingest(&batch) {
        Ok(ack) => {
            if ack.added > 0 {
                if let Err(e) = inner.ingests.append([ingest_line(&batch.to_body())]) {
                    return internal(e);
                }
            }
            text(StatusCode::OK, ack.to_body())
        }
        Err(c) => text(StatusCode::CONFLICT, conflict_body(&c.tag)),
    }
}

async fn decode(State(st): State<Arc<AppState>>, body: String) -> Response {
    let file = match SymbolFile::parse(&body) {
        Ok(f) => f,
        Err(e) => return bad_request(e),
    };
    let outcome = match QrSymbol::from_file(file) {
        Ok(sym) => decode_protected(&sym.modules, &st.keys),
        Err(_) => Err(qrseal_core::pipeline::DecodeStage::QrDecode),
    };
    let resp = match outcome {
        Ok(d) => DecodeResponse::Decoded { public: d.public, tag: d.private },
        Err(stage) => DecodeResponse::Failed { stage: stage.as_str().into() },
    };
    text(StatusCode::OK, resp.to_body())
}

async fn health() -> Response {
    text(StatusCode::OK, "status=OK\n".into())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/scans", post(scans))
        .route("/v1/batches", post(batches))
        .route("/v1/decode", post(decode))
        .route("/v1/health", get(health))
        .with_state(state)
}

pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

/// A server on its own thread and runtime, stopped on drop.
pub struct BackgroundServer {
    pub addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<thread::JoinHandle<()>>,
}

impl BackgroundServer {
    pub fn start(state: Arc<AppState>, addr: SocketAddr) -> Result<Self> {
        let listener = std::net::TcpListener::bind(addr).with_context(|| format!("binding {addr}"))?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let (tx, rx) = oneshot::channel::<()>();
        let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_io().build()?;
        let thread = thread::spawn(move || {
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).expect("listener");
                let _ = axum::serve(listener, router(state))
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await;
            });
        });
        Ok(Self { addr, shutdown: Some(tx), thread: Some(thread) })
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Data directory, key directory and thresholds for `qrseal serve`.
#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub data_dir: PathBuf,
    pub keys_dir: PathBuf,
    pub verify: VerifyConfig,
}
