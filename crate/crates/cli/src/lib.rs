//! Command-line front end: dealer, Encryptor, Decryptor server, Alice client
//! and the exact secrecy verifier.
//!
//! Exit codes: 0 success, 1 I/O failure or a failed verification, 2 protocol
//! error, 3 single-use violation, 4 validation failure (bad arguments, bad
//! key files, values out of range).

pub mod client;
pub mod commands;
pub mod report;
pub mod server;

use std::io;
use std::path::{Path, PathBuf};

use blindpad_core::keystore::KeystoreError;
use blindpad_core::protocol::ProtocolError;
use blindpad_core::wire::WireError;
use thiserror::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_PROTOCOL: u8 = 2;
pub const EXIT_SINGLE_USE: u8 = 3;
pub const EXIT_VALIDATION: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Validation(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("single-use violation: this session has already been decrypted")]
    SingleUse,
    #[error("verification failed")]
    VerificationFailed,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::VerificationFailed => EXIT_FAILURE,
            CliError::Protocol(_) => EXIT_PROTOCOL,
            CliError::SingleUse => EXIT_SINGLE_USE,
            CliError::Validation(_) => EXIT_VALIDATION,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    pub(crate) fn keystore(path: &Path, err: KeystoreError) -> Self {
        match err {
            KeystoreError::Io(source) => Self::io(format!("keystore {}", path.display()), source),
            other => CliError::Validation(format!("keystore {}: {other}", path.display())),
        }
    }
}

impl From<ProtocolError> for CliError {
    fn from(err: ProtocolError) -> Self {
        match err {
            ProtocolError::SingleUseViolation => CliError::SingleUse,
            ProtocolError::Persistence(source) => Self::io("persisting the consumed flag", source),
            ProtocolError::Arity { .. } | ProtocolError::Selection { .. } | ProtocolError::BatchLength { .. } => {
                CliError::Validation(err.to_string())
            }
            other => CliError::Protocol(other.to_string()),
        }
    }
}

impl From<WireError> for CliError {
    fn from(err: WireError) -> Self {
        match err {
            WireError::Io(source) => Self::io("transport", source),
            other => CliError::Protocol(other.to_string()),
        }
    }
}

/// Conventional file names written by `deal`.
pub fn keystore_path(dir: &Path, role: blindpad_core::keystore::Role) -> PathBuf {
    dir.join(format!("{}.keys", role.name()))
}
