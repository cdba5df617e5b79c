use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

use blindpad_core::keystore::KeystoreRecord;
use blindpad_core::num::PrimeModulus;
use blindpad_core::protocol::{ErrorReason, ProtocolMessage};
use blindpad_core::wire::decode_frame;

fn blindpad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blindpad")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

struct ServerProcess {
    child: Child,
    addr: String,
}

impl ServerProcess {
    fn start(keys: &Path) -> Self {
        let mut child = Command::new(env!("CARGO_BIN_EXE_blindpad"))
            .args(["serve", "--keys", keys.to_str().unwrap(), "--listen", "127.0.0.1:0"])
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.as_mut().unwrap()).read_line(&mut line).unwrap();
        let addr = line.trim().strip_prefix("listening on ").expect("server announces its address").to_owned();
        Self { child, addr }
    }
}

impl Drop for ServerProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

#[test]
fn pipeline_single_use_and_restart() {
    let dir = tempfile::tempdir().unwrap();
    let keys = dir.path().join("keys");
    let k = |role: &str| path(&keys, &format!("{role}.keys"));
    let batch = path(dir.path(), "batch.bin");

    assert!(blindpad(&["deal", "--p", "5", "--l", "4", "--out", keys.to_str().unwrap()]).status.success());
    assert!(blindpad(&["encrypt", "--keys", &k("encryptor"), "--messages", "3,1,4,0", "--out", &batch]).status.success());

    let server = ServerProcess::start(Path::new(&k("decryptor")));
    let fetch = |choice: &str, addr: &str| {
        blindpad(&["fetch", "--keys", &k("alice"), "--batch", &batch, "--choose", choice, "--server", addr])
    };
    let first = fetch("2", &server.addr);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(stdout(&first).trim(), "1");

    let second = fetch("3", &server.addr);
    assert_eq!(second.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&second.stderr).contains("single-use"));
    drop(server);

    let record = KeystoreRecord::load(Path::new(&k("decryptor"))).unwrap();
    assert_eq!(record.state(), Some(blindpad_core::protocol::SessionState::Consumed));
    let restarted = ServerProcess::start(Path::new(&k("decryptor")));
    assert_eq!(fetch("1", &restarted.addr).status.code(), Some(3));
}

#[test]
fn serve_once_exits_after_one_connection() {
    let dir = tempfile::tempdir().unwrap();
    let keys = dir.path();
    assert!(blindpad(&["deal", "--p", "7", "--l", "2", "--out", keys.to_str().unwrap(), "--seed", "4"]).status.success());
    let mut child = Command::new(env!("CARGO_BIN_EXE_blindpad"))
        .args(["serve", "--keys", &path(keys, "decryptor.keys"), "--listen", "127.0.0.1:0", "--once"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.as_mut().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on ").unwrap().to_owned();

    // Garbage in, malformed-frame error out.
    let mut stream = TcpStream::connect(&addr).unwrap();
    stream.write_all(b"XXXX0123456789abcdefghijklmnop").unwrap();
    let mut reply = Vec::new();
    stream.read_to_end(&mut reply).unwrap();
    let frame = decode_frame(&reply, &PrimeModulus::from_u64(7).unwrap()).unwrap();
    assert_eq!(frame.message, ProtocolMessage::Error(ErrorReason::MalformedFrame));
    assert!(child.wait().unwrap().success());
    // A malformed request does not consume the session.
    let record = KeystoreRecord::load(&keys.join("decryptor.keys")).unwrap();
    assert_eq!(record.state(), Some(blindpad_core::protocol::SessionState::Fresh));
}

#[test]
fn largest_preset_reports_508_key_bits() {
    let dir = tempfile::tempdir().unwrap();
    let out = blindpad(&["deal", "--p", "preset:2^127-1", "--l", "3", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("decryptor key 508 bits, plaintext 127 bits, ciphertext 254 bits"));
    let inspect = blindpad(&["inspect", "--keys", &path(dir.path(), "decryptor.keys")]);
    assert!(stdout(&inspect).contains("decryptor key bits: 508"));
}

#[test]
fn validation_failures_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(blindpad(&["deal", "--p", "25", "--l", "2", "--out", d]).status.code(), Some(4));
    assert_eq!(blindpad(&["deal", "--p", "5", "--l", "5", "--out", d]).status.code(), Some(4));
    assert_eq!(blindpad(&["deal", "--p", "preset:nope", "--l", "1", "--out", d]).status.code(), Some(4));
    assert_eq!(blindpad(&["deal", "--p", "preset:2^61-1", "--l", "65536", "--out", d]).status.code(), Some(4));
    assert_eq!(blindpad(&["no-such-command"]).status.code(), Some(4));

    assert!(blindpad(&["deal", "--p", "5", "--l", "2", "--out", d]).status.success());
    let batch = path(dir.path(), "b.bin");
    // Wrong role, wrong arity, message out of range.
    assert_eq!(blindpad(&["encrypt", "--keys", &path(dir.path(), "alice.keys"), "--messages", "1,2", "--out", &batch]).status.code(), Some(4));
    assert_eq!(blindpad(&["encrypt", "--keys", &path(dir.path(), "encryptor.keys"), "--messages", "1", "--out", &batch]).status.code(), Some(4));
    assert_eq!(blindpad(&["encrypt", "--keys", &path(dir.path(), "encryptor.keys"), "--messages", "1,5", "--out", &batch]).status.code(), Some(4));

    let text = std::fs::read_to_string(dir.path().join("decryptor.keys")).unwrap();
    std::fs::write(dir.path().join("bad.keys"), text.replace("p = 5", "p = 25")).unwrap();
    assert_eq!(blindpad(&["serve", "--keys", &path(dir.path(), "bad.keys"), "--listen", "127.0.0.1:0"]).status.code(), Some(4));
}

#[test]
fn batch_from_another_session_is_a_protocol_error() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(blindpad(&["deal", "--p", "11", "--l", "2", "--out", d.to_str().unwrap()]).status.success());
    }
    let batch = path(dir.path(), "batch.bin");
    assert!(blindpad(&["encrypt", "--keys", &path(&a, "encryptor.keys"), "--messages", "1,2", "--out", &batch]).status.success());
    let out = blindpad(&["fetch", "--keys", &path(&b, "alice.keys"), "--batch", &batch, "--choose", "1", "--server", "127.0.0.1:9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_command() {
    let dir = tempfile::tempdir().unwrap();
    let json = path(dir.path(), "report.json");
    let pass = blindpad(&["verify", "--definition", "blind", "--p", "5", "--json", &json]);
    assert!(pass.status.success());
    assert!(stdout(&pass).contains("PASS"));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(doc["passed"], serde_json::json!(true));
    assert_eq!(doc["definition"], serde_json::json!("blind"));

    let fail = blindpad(&["verify", "--definition", "alice", "--p", "7", "--variant", "zero-y", "--sequential"]);
    assert_eq!(fail.status.code(), Some(1));
    assert!(stdout(&fail).contains("counterexample"));

    assert_eq!(blindpad(&["verify", "--definition", "shannon", "--p", "25"]).status.code(), Some(0));
    assert_eq!(blindpad(&["verify", "--definition", "shannon", "--p", "6", "--variant", "even-keys"]).status.code(), Some(1));
    assert_eq!(blindpad(&["verify", "--definition", "alice", "--p", "11"]).status.code(), Some(4));
    assert_eq!(blindpad(&["verify", "--definition", "alice", "--p", "5", "--variant", "no-outer"]).status.code(), Some(4));
}
