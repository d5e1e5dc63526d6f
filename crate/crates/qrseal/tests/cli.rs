use std::net::TcpListener;
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

const BIN: &str = env!("CARGO_BIN_EXE_qrseal");

fn qrseal(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = qrseal(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn serve(registry: &Path, keys: &Path) -> (Server, String) {
    let port = free_port();
    let child = Command::new(BIN)
        .args(["serve", "--registry", p(registry), "--keys", p(keys), "--port", &port.to_string()])
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let url = format!("http://127.0.0.1:{port}");
    let deadline = Instant::now() + Duration::from_secs(20);
    while qrseal_scan::http::get_text(&format!("{url}/v1/health"), Duration::from_secs(1)).is_err() {
        assert!(Instant::now() < deadline, "server did not come up");
        std::thread::sleep(Duration::from_millis(50));
    }
    (Server(child), url)
}

fn scan(url: &str, file: &Path, device: &str, region: &str) -> (i32, String) {
    let out = qrseal(&[
        "scan",
        "--file",
        p(file),
        "--server",
        url,
        "--device-id",
        device,
        "--region",
        region,
        "--lat",
        "23.81",
        "--lon",
        "90.41",
        "--timestamp",
        "1700000000",
    ]);
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for e in std::fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        let dest = to.join(e.file_name());
        if e.file_type().unwrap().is_dir() {
            copy_dir(&e.path(), &dest);
        } else {
            std::fs::copy(e.path(), dest).unwrap();
        }
    }
}

#[test]
fn factory_to_end_user() {
    let tmp = tempfile::tempdir().unwrap();
    let reg = tmp.path().join("registry");
    let keys = reg.join("keys");
    ok(&["keygen", "--scheme", "rsa-demo", "--bits", "512", "--out", p(&keys), "--seed", "7"]);
    assert!(!qrseal(&["keygen", "--bits", "512", "--out", p(&keys)]).status.success());

    let id = ok(&[
        "batch",
        "new",
        "--registry",
        p(&reg),
        "--count",
        "4",
        "--public-string",
        "Hello World!",
        "--regions",
        "BD,IN",
        "--name",
        "Napa 500",
        "--batch-number",
        "BN-7",
        "--manufacturer",
        "Acme Pharma",
        "--mfg-date",
        "2024-01-01",
        "--expiry-date",
        "2026-01-01",
    ]);
    let id = id.trim();
    assert_eq!(id, "B000001");

    // Two runs from identical registry copies give identical reports.
    let twin = tmp.path().join("twin");
    copy_dir(&reg, &twin);
    let run = |r: &Path, report: &Path| {
        ok(&[
            "line",
            "run",
            "--registry",
            p(r),
            "--batch",
            id,
            "--flip-prob",
            "0.0",
            "--seed",
            "3",
            "--report",
            p(report),
        ])
    };
    assert_eq!(run(&reg, &tmp.path().join("a.txt")), "units=4 accepted=4 rejected=0\n");
    run(&twin, &tmp.path().join("b.txt"));
    let a = std::fs::read_to_string(tmp.path().join("a.txt")).unwrap();
    assert_eq!(a, std::fs::read_to_string(tmp.path().join("b.txt")).unwrap());
    assert!(a.starts_with("line_report=1\nbatch=B000001\nmode=INTEGRATED\n"));
    assert!(!qrseal(&[
        "line",
        "run",
        "--registry",
        p(&reg),
        "--batch",
        id,
        "--report",
        p(&tmp.path().join("c.txt"))
    ])
    .status
    .success());

    let out = tmp.path().join("symbols");
    ok(&[
        "batch",
        "export-symbols",
        "--registry",
        p(&reg),
        "--batch",
        id,
        "--out-dir",
        p(&out),
        "--seed",
        "9",
    ]);
    let first = out.join("B000001/000000.qrsym");
    let again = tmp.path().join("symbols2");
    ok(&[
        "batch",
        "export-symbols",
        "--registry",
        p(&twin),
        "--batch",
        id,
        "--out-dir",
        p(&again),
        "--seed",
        "9",
    ]);
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(again.join("B000001/000000.qrsym")).unwrap());
    assert!(std::fs::read_to_string(out.join("B000001/000003.pbm")).unwrap().starts_with("P1\n"));

    let decoded = ok(&["decode", "--file", p(&first)]);
    assert_eq!(decoded, "conventional: Hello World!\n");

    let server_dir = tmp.path().join("server");
    let (_server, url) = serve(&server_dir, &keys);
    assert_eq!(
        ok(&["batch", "ingest", "--registry", p(&reg), "--batch", id, "--server", &url]),
        "added=4 unchanged=0\n"
    );
    assert_eq!(
        ok(&["batch", "ingest", "--registry", p(&reg), "--batch", id, "--server", &url]),
        "added=0 unchanged=4\n"
    );

    let (code, text) = scan(&url, &first, "phone-A", "BD");
    assert_eq!(code, 0, "{text}");
    assert_eq!(
        text,
        "verdict: AUTHENTIC\nname: Napa 500\nbatch_number: BN-7\nmanufacturer: Acme Pharma\nmfg_date: 2024-01-01\nexpiry_date: 2026-01-01\n"
    );
    let (code, text) = scan(&url, &first, "phone-B", "BD");
    assert_eq!(code, 2);
    assert!(text.contains("alert: scanned from 2 distinct devices\n"));
    let (code, _) = scan(&url, &out.join("B000001/000001.qrsym"), "phone-C", "FR");
    assert_eq!(code, 2);

    // Noise in a well-formed envelope reaches the server and fails there.
    let side = 25;
    let mut noise = format!("QRSYM 1 {side} 2 Q 0\n");
    let mut x: u32 = 12345;
    for _ in 0..side {
        for _ in 0..side {
            x = x.wrapping_mul(1_103_515_245).wrapping_add(12345);
            noise.push(if x >> 16 & 1 == 1 { '1' } else { '0' });
        }
        noise.push('\n');
    }
    let noise_file = tmp.path().join("noise.qrsym");
    std::fs::write(&noise_file, noise).unwrap();
    let (code, text) = scan(&url, &noise_file, "phone-D", "BD");
    assert_eq!(
        (code, text.as_str()),
        (3, "verdict: DECODE_FAILURE\nalert: symbol could not be read as a protected code\n")
    );

    let junk = tmp.path().join("junk.qrsym");
    std::fs::write(&junk, "not a symbol").unwrap();
    assert_eq!(scan(&url, &junk, "phone-D", "BD").0, 1);
    assert_eq!(scan(&format!("http://127.0.0.1:{}", free_port()), &first, "phone-D", "BD").0, 1);
}

#[test]
fn remote_mode_line_run() {
    let tmp = tempfile::tempdir().unwrap();
    let reg = tmp.path().join("registry");
    let keys = reg.join("keys");
    ok(&["keygen", "--scheme", "xor-test", "--out", p(&keys), "--seed", "1"]);
    ok(&["batch", "new", "--registry", p(&reg), "--count", "20", "--public-string", "P", "--regions", "BD"]);
    let twin = tmp.path().join("twin");
    copy_dir(&reg, &twin);
    let (_server, url) = serve(&tmp.path().join("server"), &keys);
    let args = |r: &Path, mode: &'static str, report: &Path| {
        let mut v = vec![
            "line",
            "run",
            "--registry",
            p(r),
            "--batch",
            "B000001",
            "--flip-prob",
            "0.03",
            "--seed",
            "5",
            "--mode",
            mode,
            "--report",
            p(report),
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        if mode == "remote" {
            v.extend(["--server".to_string(), url.clone()]);
        }
        v
    };
    let (ra, rb) = (tmp.path().join("int.txt"), tmp.path().join("rem.txt"));
    let a: Vec<String> = args(&reg, "integrated", &ra);
    let b: Vec<String> = args(&twin, "remote", &rb);
    ok(&a.iter().map(String::as_str).collect::<Vec<_>>());
    ok(&b.iter().map(String::as_str).collect::<Vec<_>>());
    let strip = |s: String| s.replace("mode=REMOTE", "mode=INTEGRATED");
    assert_eq!(strip(std::fs::read_to_string(ra).unwrap()), strip(std::fs::read_to_string(rb).unwrap()));
    assert!(!qrseal(&[
        "line",
        "run",
        "--registry",
        p(&reg),
        "--batch",
        "B000001",
        "--mode",
        "remote",
        "--report",
        "x"
    ])
    .status
    .success());
}

#[test]
fn bad_arguments_fail_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let reg = tmp.path().join("r");
    let out = qrseal(&["batch", "new", "--registry", p(&reg), "--count", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("count must be at least 1"));
    assert!(!qrseal(&["keygen", "--bits", "100", "--out", p(&tmp.path().join("k"))]).status.success());
    assert!(!qrseal(&["keygen", "--scheme", "dsa", "--out", p(&tmp.path().join("k"))]).status.success());
}
