use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qrseal::keys::{self, load_seal_key, load_tag_keys};
use qrseal::line::{run_line_on_store, RemoteDecoder};
use qrseal::server::{AppState, ServeConfig};
use qrseal::store::RegistryStore;
use qrseal::unix_now;
use qrseal_core::payload::{parse_conventional, ProtectedTag};
use qrseal_core::pipeline::{decode_protected, protect_tag, Integrated, TagDecoder};
use qrseal_core::qc::{DecodeMode, LineConfig};
use qrseal_core::qr::{decode_symbol, QrSymbol};
use qrseal_core::registry::BatchDescriptor;
use qrseal_core::seal::{generate_keypair, Scheme};
use qrseal_core::verify::VerifyConfig;
use qrseal_scan::{exit_code, ClientConfig, EXIT_ERROR};
use qrseal_wire::{BatchIngest, EcLevel, IngestAck, ProductMeta, SymbolFile};
use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;

#[derive(Parser)]
#[command(name = "qrseal", version, about = "Protected QR codes: generate, inspect, verify")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a sealing key pair and a concealment key.
    Keygen {
        #[arg(long, default_value = "rsa-demo")]
        scheme: Scheme,
        #[arg(long, default_value_t = 1024)]
        bits: usize,
        #[arg(long)]
        out: PathBuf,
        /// Derive keys from a seed instead of OS entropy (tests and demos only).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Create batches, export their symbols, push them to a server.
    #[command(subcommand)]
    Batch(BatchCmd),
    /// Simulate the production line's print and inspection loop.
    #[command(subcommand)]
    Line(LineCmd),
    /// Run the verification server.
    Serve {
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        keys: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        #[arg(long, default_value_t = 3)]
        max_scans: usize,
    },
    /// Send a symbol to a verification server (same as `qrseal-scan`).
    Scan(ScanArgs),
    /// Encode one protected symbol.
    Encode {
        #[arg(long, default_value = "")]
        public: String,
        #[arg(long)]
        private: String,
        #[arg(long)]
        keys: PathBuf,
        #[arg(long, default_value = "Q")]
        ec: EcLevel,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Decode a symbol: what any scanner shows, and with keys the private tag.
    Decode {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        keys: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MetaArgs {
    #[arg(long, default_value = "")]
    name: String,
    #[arg(long, default_value = "")]
    batch_number: String,
    #[arg(long, default_value = "")]
    manufacturer: String,
    #[arg(long, default_value = "")]
    mfg_date: String,
    #[arg(long, default_value = "")]
    expiry_date: String,
}

#[derive(Subcommand)]
enum BatchCmd {
    /// Stage a new batch of unique tags.
    New {
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value = "")]
        public_string: String,
        /// Comma-separated region codes.
        #[arg(long, value_delimiter = ',')]
        regions: Vec<String>,
        #[command(flatten)]
        meta: MetaArgs,
    },
    /// Write one QRSYM (and PBM) file per record of a batch.
    ExportSymbols {
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        batch: String,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        keys: Option<PathBuf>,
        #[arg(long, default_value = "Q")]
        ec: EcLevel,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Push a batch's accepted units to a verification server.
    Ingest {
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        batch: String,
        #[arg(long)]
        server: String,
    },
}

#[derive(Subcommand)]
enum LineCmd {
    /// Print, distort, inspect and accept or reject every remaining unit.
    Run {
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        keys: Option<PathBuf>,
        #[arg(long)]
        batch: String,
        #[arg(long, default_value_t = 0.0)]
        flip_prob: f64,
        #[arg(long, default_value = "integrated")]
        mode: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "Q")]
        ec: EcLevel,
        #[arg(long)]
        report: PathBuf,
        /// Server for `--mode remote`.
        #[arg(long)]
        server: Option<String>,
    },
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    file: PathBuf,
    #[arg(long, default_value = "http://127.0.0.1:8080")]
    server: String,
    #[arg(long)]
    device_id: String,
    #[arg(long)]
    region: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lat: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lon: f64,
    #[arg(long, allow_negative_numbers = true)]
    timestamp: Option<i64>,
}

fn rng_for(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn keys_dir(registry: &Path, explicit: Option<PathBuf>) -> PathBuf {
    explicit.unwrap_or_else(|| registry.join(qrseal::store::KEYS_DIR))
}

fn keygen(scheme: Scheme, bits: usize, out: &Path, seed: Option<u64>) -> Result<()> {
    let mut rng = rng_for(seed);
    let pair = generate_keypair(scheme, bits, &mut rng)?;
    let conceal = keys::random_conceal_key(&mut rng);
    keys::write_key_dir(out, &pair, &conceal)?;
    println!("wrote {} keys to {}", scheme.name(), out.display());
    Ok(())
}

fn batch_new(
    registry: &Path,
    count: usize,
    public: String,
    regions: Vec<String>,
    meta: MetaArgs,
) -> Result<()> {
    let mut store = RegistryStore::open(registry)?;
    let descriptor = BatchDescriptor {
        public_string: public,
        meta: ProductMeta {
            name: meta.name,
            batch_number: meta.batch_number,
            manufacturer: meta.manufacturer,
            mfg_date: meta.mfg_date,
            expiry_date: meta.expiry_date,
        },
        intended_regions: regions.into_iter().filter(|r| !r.is_empty()).collect::<BTreeSet<_>>(),
        seal_key_id: format!("{}/{}", qrseal::store::KEYS_DIR, keys::SEAL_PUBLIC),
        conceal_key_id: format!("{}/{}", qrseal::store::KEYS_DIR, keys::CONCEAL),
    };
    let id =
        store.registry_mut().create_batch(descriptor, count, unix_now(), &mut ChaCha20Rng::from_entropy())?;
    store.commit()?;
    println!("{id}");
    Ok(())
}

fn export_symbols(
    registry: &Path,
    batch: &str,
    out_dir: &Path,
    keys: &Path,
    ec: EcLevel,
    seed: Option<u64>,
) -> Result<()> {
    let mut store = RegistryStore::open(registry)?;
    let seal = load_seal_key(keys)?;
    let conceal = keys::load_conceal_key(keys)?;
    let records: Vec<_> = store.registry().batch_records(batch).cloned().collect();
    if records.is_empty() {
        bail!("no batch {batch}");
    }
    let dir = out_dir.join(batch);
    fs::create_dir_all(&dir)?;
    let mut rng = rng_for(seed);
    for r in &records {
        let tag = ProtectedTag::new(r.public_string.clone(), r.private_tag.clone())?;
        let sym = protect_tag(&tag, &seal, &conceal, ec, &mut rng)?;
        let file = sym.to_file();
        let stem = dir.join(format!("{:06}", r.seq));
        let path = stem.with_extension("qrsym");
        fs::write(&path, file.to_text())?;
        fs::write(stem.with_extension("pbm"), file.to_pbm())?;
        store.registry_mut().set_symbol_path(&r.private_tag, &path.display().to_string())?;
    }
    store.commit()?;
    println!("wrote {} symbols to {}", records.len(), dir.display());
    Ok(())
}

fn batch_ingest(registry: &Path, batch: &str, server: &str) -> Result<()> {
    let reg = RegistryStore::snapshot(registry)?;
    let b = reg.batch(batch).with_context(|| format!("no batch {batch}"))?;
    let tags: Vec<String> = reg
        .batch_records(batch)
        .filter(|r| reg.lookup_final(&r.private_tag).is_some())
        .map(|r| r.private_tag.clone())
        .collect();
    if tags.is_empty() {
        bail!("batch {batch} has no accepted units");
    }
    let body = BatchIngest {
        batch_id: b.batch_id.clone(),
        public_string: b.descriptor.public_string.clone(),
        meta: b.descriptor.meta.clone(),
        regions: b.descriptor.intended_regions.iter().cloned().collect(),
        tags,
    }
    .to_body();
    let url = format!("{}/v1/batches", server.trim_end_matches('/'));
    let (status, reply) = qrseal_scan::http::post_text(&url, &body, Duration::from_secs(30))?;
    if status != 200 {
        bail!("server replied {status}: {}", reply.trim_end());
    }
    let ack = IngestAck::parse(&reply)?;
    println!("added={} unchanged={}", ack.added, ack.unchanged);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn line_run(
    registry: &Path,
    keys: &Path,
    batch: String,
    p: f64,
    mode: &str,
    seed: u64,
    ec: EcLevel,
    report: &Path,
    server: Option<String>,
) -> Result<()> {
    let mode: DecodeMode = mode.parse().map_err(|_| anyhow::anyhow!("mode is integrated or remote"))?;
    let seal = load_seal_key(keys)?;
    let tag_keys = load_tag_keys(keys)?;
    let conceal = tag_keys.conceal.clone();
    let decoder: Box<dyn TagDecoder> = match (mode, server) {
        (DecodeMode::Integrated, _) => Box::new(Integrated { keys: tag_keys }),
        (DecodeMode::Remote, Some(s)) => Box::new(RemoteDecoder::new(&s)),
        (DecodeMode::Remote, None) => bail!("--mode remote needs --server"),
    };
    let cfg =
        LineConfig { batch_id: batch, flip_probability: p, decode_mode: mode, rng_seed: seed, ec_level: ec };
    let mut store = RegistryStore::open(registry)?;
    let rep = run_line_on_store(&mut store, &cfg, &seal, &conceal, decoder.as_ref(), unix_now())?;
    fs::write(report, rep.to_text()).with_context(|| format!("writing {}", report.display()))?;
    println!("units={} accepted={} rejected={}", rep.units.len(), rep.accepted, rep.rejected);
    if let Some(m) = rep.median_decode_nanos() {
        eprintln!("median decode {:.3} ms ({mode})", m as f64 / 1e6);
    }
    Ok(())
}

fn serve(cfg: ServeConfig, bind: &str, port: u16) -> Result<()> {
    let keys = load_tag_keys(&cfg.keys_dir)?;
    let state = AppState::load(&cfg.data_dir, keys, cfg.verify)?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind((bind, port)).await?;
        eprintln!("listening on http://{} ({} final records)", listener.local_addr()?, state.final_records());
        qrseal::server::serve(listener, state).await?;
        Ok(())
    })
}

fn encode(
    public: String,
    private: String,
    keys: &Path,
    ec: EcLevel,
    out: &Path,
    seed: Option<u64>,
) -> Result<()> {
    let seal = load_seal_key(keys)?;
    let conceal = keys::load_conceal_key(keys)?;
    let tag = ProtectedTag::new(public, private)?;
    let sym = protect_tag(&tag, &seal, &conceal, ec, &mut rng_for(seed))?;
    fs::write(out, sym.to_file().to_text())?;
    println!("version={} ec={} mask={}", sym.version, sym.ec_level, sym.mask);
    Ok(())
}

fn decode(file: &Path, keys: Option<PathBuf>) -> Result<()> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let sym = QrSymbol::from_file(SymbolFile::parse(&text)?)?;
    let payload = decode_symbol(&sym.modules)?;
    println!("conventional: {}", parse_conventional(payload.as_bytes()).text);
    if let Some(k) = keys {
        match decode_protected(&sym.modules, &load_tag_keys(&k)?) {
            Ok(d) => println!("private: {}", d.private),
            Err(stage) => bail!("protected decode failed at {stage}"),
        }
    }
    Ok(())
}

fn scan(a: ScanArgs) -> ExitCode {
    let text = match fs::read_to_string(&a.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", a.file.display());
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let cfg = ClientConfig {
        server: a.server,
        device_id: a.device_id,
        region: a.region,
        lat: a.lat,
        lon: a.lon,
        timeout: Duration::from_secs(10),
    };
    match qrseal_scan::scan(&cfg, &text, a.timestamp.unwrap_or_else(unix_now)) {
        Ok(r) => {
            print!("{}", r.render());
            ExitCode::from(exit_code(r.verdict))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Keygen { scheme, bits, out, seed } => keygen(scheme, bits, &out, seed),
        Cmd::Batch(BatchCmd::New { registry, count, public_string, regions, meta }) => {
            batch_new(&registry, count, public_string, regions, meta)
        }
        Cmd::Batch(BatchCmd::ExportSymbols { registry, batch, out_dir, keys, ec, seed }) => {
            let k = keys_dir(&registry, keys);
            export_symbols(&registry, &batch, &out_dir, &k, ec, seed)
        }
        Cmd::Batch(BatchCmd::Ingest { registry, batch, server }) => batch_ingest(&registry, &batch, &server),
        Cmd::Line(LineCmd::Run { registry, keys, batch, flip_prob, mode, seed, ec, report, server }) => {
            let k = keys_dir(&registry, keys);
            line_run(&registry, &k, batch, flip_prob, &mode, seed, ec, &report, server)
        }
        Cmd::Serve { registry, keys, port, bind, max_scans } => {
            let verify = VerifyConfig { max_scans, ..VerifyConfig::default() };
            serve(ServeConfig { data_dir: registry, keys_dir: keys, verify }, &bind, port)
        }
        Cmd::Encode { public, private, keys, ec, out, seed } => {
            encode(public, private, &keys, ec, &out, seed)
        }
        Cmd::Decode { file, keys } => decode(&file, keys),
        Cmd::Scan(_) => unreachable!("handled before dispatch"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Cmd::Scan(a) = cli.cmd {
        return scan(a);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
