//! The Decryptor as a TCP service: one request frame in, one frame out per
//! connection.
//!
//! The session is claimed atomically and the consumed flag is written to the
//! keystore before the response leaves, so no restart can ever produce a
//! second answer.

use std::io::{Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use blindpad_core::keystore::{KeystoreRecord, RecordBody};
use blindpad_core::num::PrimeModulus;
use blindpad_core::protocol::{Decryptor, ErrorReason, ProtocolError, ProtocolMessage, SessionId, SessionState};
use blindpad_core::wire::{decode_frame, encode_frame, read_frame_bytes, Frame};

use crate::CliError;

const IO_TIMEOUT: Duration = Duration::from_secs(10);
const DRAIN_TIMEOUT: Duration = Duration::from_millis(200);
const DRAIN_LIMIT: u64 = 64 * 1024;

struct Session {
    decryptor: Decryptor,
    record: Mutex<KeystoreRecord>,
    path: PathBuf,
    modulus: PrimeModulus,
    session_id: SessionId,
}

impl Session {
    fn persist_consumed(&self) -> std::io::Result<()> {
        let mut record = self.record.lock().unwrap_or_else(|e| e.into_inner());
        record.set_state(SessionState::Consumed);
        record.save(&self.path).map_err(|e| match e {
            blindpad_core::keystore::KeystoreError::Io(io) => io,
            other => std::io::Error::other(other.to_string()),
        })
    }

    fn answer(&self, bytes: &[u8]) -> Result<ProtocolMessage, ErrorReason> {
        let frame = decode_frame(bytes, &self.modulus).map_err(|_| ErrorReason::MalformedFrame)?;
        if frame.session_id != self.session_id {
            return Err(ErrorReason::InvalidRequest);
        }
        let ProtocolMessage::BlindRequest(req) = frame.message else {
            return Err(ErrorReason::InvalidRequest);
        };
        match self.decryptor.respond_durably(&req, || self.persist_consumed()) {
            Ok(resp) => Ok(ProtocolMessage::BlindResponse(resp)),
            Err(ProtocolError::SingleUseViolation) => Err(ErrorReason::SingleUseViolation),
            Err(ProtocolError::Persistence(e)) => {
                eprintln!("blindpad serve: could not persist consumed flag, withholding response: {e}");
                // The in-memory claim stands, so the session is unusable rather than replayable.
                Err(ErrorReason::SingleUseViolation)
            }
            Err(_) => Err(ErrorReason::InvalidRequest),
        }
    }

    fn handle(&self, mut stream: TcpStream) -> std::io::Result<()> {
        stream.set_read_timeout(Some(IO_TIMEOUT))?;
        stream.set_write_timeout(Some(IO_TIMEOUT))?;
        let message = match read_frame_bytes(&mut stream) {
            Ok(bytes) => self.answer(&bytes).unwrap_or_else(ProtocolMessage::Error),
            Err(e) if e.is_malformed() => ProtocolMessage::Error(ErrorReason::MalformedFrame),
            Err(blindpad_core::wire::WireError::Io(e)) => return Err(e),
            Err(_) => unreachable!("is_malformed covers every non-I/O error"),
        };
        let out = encode_frame(&Frame { session_id: self.session_id, message }, &self.modulus)
            .expect("server only emits in-range values");
        stream.write_all(&out)?;
        stream.flush()?;
        // Closing with unread input pending makes the kernel send RST, which can
        // discard the reply before the peer reads it. Half-close, then drain a bit.
        stream.shutdown(Shutdown::Write)?;
        stream.set_read_timeout(Some(DRAIN_TIMEOUT))?;
        let _ = std::io::copy(&mut (&stream).take(DRAIN_LIMIT), &mut std::io::sink());
        Ok(())
    }
}

pub struct Server {
    listener: TcpListener,
    session: Arc<Session>,
}

impl Server {
    /// Loads a decryptor keystore and binds. A record already marked consumed
    /// is served too: every request then gets a single-use error.
    pub fn bind(keys: &Path, addr: impl ToSocketAddrs) -> Result<Self, CliError> {
        let record = KeystoreRecord::load(keys).map_err(|e| CliError::keystore(keys, e))?;
        let RecordBody::Decryptor { view, state } = record.body().clone() else {
            return Err(CliError::Validation(format!(
                "{} holds {} keys, the server needs decryptor keys",
                keys.display(),
                record.role()
            )));
        };
        let listener = TcpListener::bind(addr).map_err(|e| CliError::io("binding listener", e))?;
        let session = Session {
            modulus: *view.modulus(),
            session_id: view.session_id(),
            decryptor: Decryptor::restore(view, state),
            record: Mutex::new(record),
            path: keys.to_path_buf(),
        };
        Ok(Self { listener, session: Arc::new(session) })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, CliError> {
        self.listener.local_addr().map_err(|e| CliError::io("listener address", e))
    }

    /// Accepts connections, each on its own thread. Returns after
    /// `max_connections` have been handled, or never when `None`.
    pub fn run(self, max_connections: Option<usize>) -> Result<(), CliError> {
        let mut handles = Vec::new();
        for (n, stream) in self.listener.incoming().enumerate() {
            match stream {
                Ok(stream) => {
                    let session = Arc::clone(&self.session);
                    handles.push(thread::spawn(move || {
                        if let Err(e) = session.handle(stream) {
                            eprintln!("blindpad serve: connection failed: {e}");
                        }
                    }));
                }
                Err(e) => eprintln!("blindpad serve: accept failed: {e}"),
            }
            if max_connections.is_some_and(|max| n + 1 >= max) {
                break;
            }
            handles.retain(|h| !h.is_finished());
        }
        for h in handles {
            let _ = h.join();
        }
        Ok(())
    }
}
