//! Alice's side over the network.

use std::io::Write;
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use blindpad_core::num::U256;
use blindpad_core::protocol::{alice_receive, AliceView, BlindRequest, BlindResponse, ErrorReason, ProtocolMessage};
use blindpad_core::wire::{decode_frame, encode_frame, read_frame_bytes, Frame};

use crate::CliError;

const IO_TIMEOUT: Duration = Duration::from_secs(10);

/// Decodes a batch frame and checks it belongs to Alice's session.
pub fn read_batch(view: &AliceView, bytes: &[u8]) -> Result<blindpad_core::protocol::CiphertextBatch, CliError> {
    let frame = decode_frame(bytes, view.modulus())?;
    if frame.session_id != view.session_id() {
        return Err(CliError::Protocol(format!(
            "batch is for session {}, keys are for {}",
            frame.session_id,
            view.session_id()
        )));
    }
    match frame.message {
        ProtocolMessage::CiphertextBatch(batch) => Ok(batch),
        other => Err(CliError::Protocol(format!("expected a ciphertext batch frame, got {other:?}"))),
    }
}

/// Sends one blind request and waits for the single answer.
pub fn exchange(view: &AliceView, req: BlindRequest, server: impl ToSocketAddrs) -> Result<BlindResponse, CliError> {
    let mut stream = TcpStream::connect(server).map_err(|e| CliError::io("connecting to server", e))?;
    stream.set_read_timeout(Some(IO_TIMEOUT)).map_err(|e| CliError::io("socket setup", e))?;
    let frame = Frame { session_id: view.session_id(), message: ProtocolMessage::BlindRequest(req) };
    stream
        .write_all(&encode_frame(&frame, view.modulus())?)
        .map_err(|e| CliError::io("sending request", e))?;
    let reply = decode_frame(&read_frame_bytes(&mut stream)?, view.modulus())?;
    if reply.session_id != view.session_id() {
        return Err(CliError::Protocol("reply carries another session id".into()));
    }
    match reply.message {
        ProtocolMessage::BlindResponse(resp) => Ok(resp),
        ProtocolMessage::Error(ErrorReason::SingleUseViolation) => Err(CliError::SingleUse),
        ProtocolMessage::Error(reason) => Err(CliError::Protocol(format!("server refused: {reason}"))),
        other => Err(CliError::Protocol(format!("unexpected reply {other:?}"))),
    }
}

/// Runs Alice end to end and returns `m_choice` (1-based).
pub fn fetch(view: &AliceView, batch_bytes: &[u8], choice: usize, server: impl ToSocketAddrs) -> Result<U256, CliError> {
    let batch = read_batch(view, batch_bytes)?;
    let mut session = alice_receive(view, &batch)?;
    let req = session.request(choice, view)?;
    let resp = exchange(view, req, server)?;
    Ok(session.finish(&resp, view)?.value())
}
