use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use clap::Parser;
use qrseal_scan::{exit_code, scan, ClientConfig, EXIT_ERROR};

/// Submit a QRSYM symbol to a qrseal verification server.
///
/// Exit status: 0 authentic, 2 suspect, 3 unknown tag or unreadable
/// symbol, 1 on any local or transport error.
#[derive(Parser, Debug)]
#[command(name = "qrseal-scan", version)]
struct Args {
    #[arg(long)]
    file: PathBuf,
    #[arg(long, env = "QRSEAL_SERVER", default_value = "http://127.0.0.1:8080")]
    server: String,
    #[arg(long, env = "QRSEAL_DEVICE_ID")]
    device_id: String,
    #[arg(long, env = "QRSEAL_REGION")]
    region: String,
    #[arg(long, env = "QRSEAL_LAT", default_value_t = 0.0, allow_negative_numbers = true)]
    lat: f64,
    #[arg(long, env = "QRSEAL_LON", default_value_t = 0.0, allow_negative_numbers = true)]
    lon: f64,
    /// Unix seconds; defaults to now.
    #[arg(long, allow_negative_numbers = true)]
    timestamp: Option<i64>,
    #[arg(long, default_value_t = 10)]
    timeout_secs: u64,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.file.display());
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let cfg = ClientConfig {
        server: args.server,
        device_id: args.device_id,
        region: args.region,
        lat: args.lat,
        lon: args.lon,
        timeout: Duration::from_secs(args.timeout_secs),
    };
    let ts = args.timestamp.unwrap_or_else(|| {
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs() as i64).unwrap_or(0)
    });
    match scan(&cfg, &text, ts) {
        Ok(resp) => {
            print!("{}", resp.render());
            ExitCode::from(exit_code(resp.verdict))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
