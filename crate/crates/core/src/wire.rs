//! Binary framing for protocol messages.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "BPD1"
//! 4       1     type: 0x01 batch, 0x02 request, 0x03 response, 0x7F error
//! 5       16    session id
//! 21      2     bit length of p, big-endian
//! 23      2     payload count, big-endian
//! 25      n*W   payload, each value big-endian in W bytes
//! ```
//!
//! `W` is `ceil(2*bits/8)` for batch values (mod `p^2`), `ceil(bits/8)` for
//! requests and responses (mod `p`), and 1 for the error reason code.
//! Decoding is strict: the length must match exactly and every value must be
//! in range for its modulus.

use std::io::{self, Read};

use thiserror::Error;

use crate::num::{PrimeModulus, U256};
use crate::protocol::{BlindRequest, BlindResponse, CiphertextBatch, ErrorReason, ProtocolMessage, SessionId};

pub const MAGIC: [u8; 4] = *b"BPD1";
/// The count field is a `u16`, which bounds the batch length on the wire.
pub const MAX_BATCH_LEN: usize = u16::MAX as usize;

pub const HEADER_LEN: usize = 25;

pub const TYPE_BATCH: u8 = 0x01;
pub const TYPE_REQUEST: u8 = 0x02;
pub const TYPE_RESPONSE: u8 = 0x03;
pub const TYPE_ERROR: u8 = 0x7F;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unknown message type 0x{0:02x}")]
    UnknownType(u8),
    #[error("frame is for a {got}-bit prime, expected {expected} bits")]
    BitLength { expected: u32, got: u16 },
    #[error("frame is {got} bytes, layout requires {expected}")]
    Length { expected: usize, got: usize },
    #[error("message type 0x{kind:02x} carries exactly one value, got {count}")]
    Count { kind: u8, count: u16 },
    #[error("empty ciphertext batch")]
    EmptyBatch,
    #[error("too many values for one frame: {0}")]
    TooManyValues(usize),
    #[error("value {value} not below its modulus {modulus}")]
    OutOfRange { value: U256, modulus: U256 },
    #[error("unknown error reason 0x{0:02x}")]
    UnknownReason(u8),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl WireError {
    /// Whether the peer should be told the frame was malformed, as opposed to
    /// a local I/O failure.
    pub fn is_malformed(&self) -> bool {
        !matches!(self, Self::Io(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub session_id: SessionId,
    pub message: ProtocolMessage,
}

/// The fixed 25-byte prefix, parsed without knowing `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeader {
    pub kind: u8,
    pub session_id: SessionId,
    pub p_bitlen: u16,
    pub count: u16,
}

impl FrameHeader {
    pub fn parse(bytes: &[u8]) -> Result<Self, WireError> {
        if bytes.len() < HEADER_LEN {
            return Err(WireError::Length { expected: HEADER_LEN, got: bytes.len() });
        }
        let magic: [u8; 4] = bytes[0..4].try_into().expect("4 bytes");
        if magic != MAGIC {
            return Err(WireError::BadMagic(magic));
        }
        let kind = bytes[4];
        if !matches!(kind, TYPE_BATCH | TYPE_REQUEST | TYPE_RESPONSE | TYPE_ERROR) {
            return Err(WireError::UnknownType(kind));
        }
        let session_id = SessionId::from_bytes(bytes[5..21].try_into().expect("16 bytes"));
        let p_bitlen = u16::from_be_bytes([bytes[21], bytes[22]]);
        let count = u16::from_be_bytes([bytes[23], bytes[24]]);
        if kind != TYPE_BATCH && count != 1 {
            return Err(WireError::Count { kind, count });
        }
        if kind == TYPE_BATCH && count == 0 {
            return Err(WireError::EmptyBatch);
        }
        Ok(Self { kind, session_id, p_bitlen, count })
    }

    pub fn value_width(&self) -> usize {
        value_width(self.kind, u32::from(self.p_bitlen))
    }

    pub fn frame_len(&self) -> usize {
        HEADER_LEN + usize::from(self.count) * self.value_width()
    }
}

fn value_width(kind: u8, bits: u32) -> usize {
    match kind {
        TYPE_BATCH => (2 * bits as usize).div_ceil(8),
        TYPE_ERROR => 1,
        _ => (bits as usize).div_ceil(8),
    }
}

fn kind_of(message: &ProtocolMessage) -> u8 {
    match message {
        ProtocolMessage::CiphertextBatch(_) => TYPE_BATCH,
        ProtocolMessage::BlindRequest(_) => TYPE_REQUEST,
        ProtocolMessage::BlindResponse(_) => TYPE_RESPONSE,
        ProtocolMessage::Error(_) => TYPE_ERROR,
    }
}

pub fn encode_frame(frame: &Frame, p: &PrimeModulus) -> Result<Vec<u8>, WireError> {
    let kind = kind_of(&frame.message);
    let (values, modulus): (Vec<U256>, U256) = match &frame.message {
        ProtocolMessage::CiphertextBatch(CiphertextBatch(u)) => (u.clone(), p.p_squared()),
        ProtocolMessage::BlindRequest(BlindRequest(w)) => (vec![*w], p.p()),
        ProtocolMessage::BlindResponse(BlindResponse(w)) => (vec![*w], p.p()),
        ProtocolMessage::Error(reason) => (vec![U256::from_u64(u64::from(reason.code()))], U256::from_u64(256)),
    };
    if values.is_empty() {
        return Err(WireError::EmptyBatch);
    }
    let count = u16::try_from(values.len()).map_err(|_| WireError::TooManyValues(values.len()))?;
    let bits = p.bit_len();
    let width = value_width(kind, bits);
    let mut out = Vec::with_capacity(HEADER_LEN + values.len() * width);
    out.extend_from_slice(&MAGIC);
    out.push(kind);
    out.extend_from_slice(frame.session_id.as_bytes());
    out.extend_from_slice(&(bits as u16).to_be_bytes());
    out.extend_from_slice(&count.to_be_bytes());
    for v in values {
        if v >= modulus {
            return Err(WireError::OutOfRange { value: v, modulus });
        }
        out.extend_from_slice(&v.to_be_bytes()[32 - width..]);
    }
    Ok(out)
}

pub fn decode_frame(bytes: &[u8], p: &PrimeModulus) -> Result<Frame, WireError> {
    let header = FrameHeader::parse(bytes)?;
    let bits = p.bit_len();
    if u32::from(header.p_bitlen) != bits {
        return Err(WireError::BitLength { expected: bits, got: header.p_bitlen });
    }
    if bytes.len() != header.frame_len() {
        return Err(WireError::Length { expected: header.frame_len(), got: bytes.len() });
    }
    let width = header.value_width();
    let values: Vec<U256> =
        bytes[HEADER_LEN..].chunks_exact(width).map(|c| U256::from_be_slice(c).expect("width <= 32")).collect();
    let in_range = |v: U256, modulus: U256| {
        if v >= modulus {
            return Err(WireError::OutOfRange { value: v, modulus });
        }
        Ok(v)
    };
    let message = match header.kind {
        TYPE_BATCH => ProtocolMessage::CiphertextBatch(CiphertextBatch(
            values.into_iter().map(|v| in_range(v, p.p_squared())).collect::<Result<_, _>>()?,
        )),
        TYPE_REQUEST => ProtocolMessage::BlindRequest(BlindRequest(in_range(values[0], p.p())?)),
        TYPE_RESPONSE => ProtocolMessage::BlindResponse(BlindResponse(in_range(values[0], p.p())?)),
        _ => {
            let code = values[0].low_u64() as u8;
            ProtocolMessage::Error(ErrorReason::from_code(code).ok_or(WireError::UnknownReason(code))?)
        }
    };
    Ok(Frame { session_id: header.session_id, message })
}

/// Reads exactly one frame's bytes from a stream, sized by its header.
pub fn read_frame_bytes(reader: &mut impl Read) -> Result<Vec<u8>, WireError> {
    let mut buf = vec![0u8; HEADER_LEN];
    reader.read_exact(&mut buf)?;
    let header = FrameHeader::parse(&buf)?;
    buf.resize(header.frame_len(), 0);
    reader.read_exact(&mut buf[HEADER_LEN..])?;
    Ok(buf)
}
