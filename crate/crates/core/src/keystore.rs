//! Labeled decimal key files, one per role.
//!
//! ```text
//! # blindpad keystore
//! version = 1
//! session_id = 000102030405060708090a0b0c0d0e0f
//! role = decryptor
//! p = 5
//! l = 4
//! x_k = 2
//! y_k = 3
//! k_c = 0
//! k_p = 1
//! consumed = false
//! ```
//!
//! Which key fields appear depends on the role: the encryptor file has
//! `x_k, y_k, k_1..k_L`, Alice's has `k_1..k_L, k_c, k_p`, the decryptor's
//! has `x_k, y_k, k_c, k_p, consumed`, and the dealer's has everything.
//! Loading rejects unknown, duplicate and missing fields, a composite `p`,
//! and any value outside its modulus.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs::{self, File};
use std::io::{self, Write as _};
use std::path::Path;

use thiserror::Error;

use crate::num::{NumError, PrimeModulus, U256};
use crate::outer_pad::OuterKey;
use crate::protocol::{
    AliceView, DecryptorView, EncryptorView, ProtocolError, SessionId, SessionKeyMaterial, SessionState,
};
use crate::twopad::TwoPadKey;

pub const FORMAT_VERSION: u32 = 1;

type KeyFields<'a> = (Option<&'a TwoPadKey>, Option<&'a [OuterKey]>, Option<(&'a OuterKey, &'a OuterKey)>);

#[derive(Debug, Error)]
pub enum KeystoreError {
    #[error("keystore I/O failed: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: &'static str },
    #[error("unknown field {0:?}")]
    UnknownField(String),
    #[error("field {0:?} appears twice")]
    DuplicateField(String),
    #[error("missing field {0:?}")]
    MissingField(String),
    #[error("unsupported keystore version {0}")]
    UnsupportedVersion(String),
    #[error("field {field:?}: {reason}")]
    InvalidValue { field: String, reason: String },
    #[error("invalid modulus: {0}")]
    Modulus(#[from] NumError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Dealer,
    Encryptor,
    Alice,
    Decryptor,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::Dealer, Role::Encryptor, Role::Alice, Role::Decryptor];

    pub fn name(self) -> &'static str {
        match self {
            Role::Dealer => "dealer",
            Role::Encryptor => "encryptor",
            Role::Alice => "alice",
            Role::Decryptor => "decryptor",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == s)
    }

    fn has_inner_key(self) -> bool {
        matches!(self, Role::Dealer | Role::Encryptor | Role::Decryptor)
    }

    fn has_batch_keys(self) -> bool {
        matches!(self, Role::Dealer | Role::Encryptor | Role::Alice)
    }

    fn has_blind_keys(self) -> bool {
        matches!(self, Role::Dealer | Role::Alice | Role::Decryptor)
    }

    fn has_consumed(self) -> bool {
        matches!(self, Role::Dealer | Role::Decryptor)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordBody {
    Dealer(SessionKeyMaterial),
    Encryptor(EncryptorView),
    Alice(AliceView),
    Decryptor { view: DecryptorView, state: SessionState },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeystoreRecord {
    batch_len: usize,
    body: RecordBody,
}

impl KeystoreRecord {
    pub fn dealer(material: SessionKeyMaterial) -> Self {
        Self { batch_len: material.batch_len(), body: RecordBody::Dealer(material) }
    }

    pub fn encryptor(view: EncryptorView) -> Self {
        Self { batch_len: view.batch_len(), body: RecordBody::Encryptor(view) }
    }

    pub fn alice(view: AliceView) -> Self {
        Self { batch_len: view.batch_len(), body: RecordBody::Alice(view) }
    }

    pub fn decryptor(view: DecryptorView, batch_len: usize, state: SessionState) -> Self {
        Self { batch_len, body: RecordBody::Decryptor { view, state } }
    }

    /// The four files the dealer writes for one session.
    pub fn all_for(material: &SessionKeyMaterial) -> [KeystoreRecord; 4] {
        [
            Self::dealer(material.clone()),
            Self::encryptor(material.encryptor_view()),
            Self::alice(material.alice_view()),
            Self::decryptor(material.decryptor_view(), material.batch_len(), material.state()),
        ]
    }

    pub fn role(&self) -> Role {
        match self.body {
            RecordBody::Dealer(_) => Role::Dealer,
            RecordBody::Encryptor(_) => Role::Encryptor,
            RecordBody::Alice(_) => Role::Alice,
            RecordBody::Decryptor { .. } => Role::Decryptor,
        }
    }

    pub fn body(&self) -> &RecordBody {
        &self.body
    }

    pub fn batch_len(&self) -> usize {
        self.batch_len
    }

    pub fn session_id(&self) -> SessionId {
        match &self.body {
            RecordBody::Dealer(m) => m.session_id(),
            RecordBody::Encryptor(v) => v.session_id(),
            RecordBody::Alice(v) => v.session_id(),
            RecordBody::Decryptor { view, .. } => view.session_id(),
        }
    }

    pub fn modulus(&self) -> PrimeModulus {
        *match &self.body {
            RecordBody::Dealer(m) => m.modulus(),
            RecordBody::Encryptor(v) => v.modulus(),
            RecordBody::Alice(v) => v.modulus(),
            RecordBody::Decryptor { view, .. } => view.modulus(),
        }
    }

    /// `None` for roles that do not track consumption.
    pub fn state(&self) -> Option<SessionState> {
        match &self.body {
            RecordBody::Dealer(m) => Some(m.state()),
            RecordBody::Decryptor { state, .. } => Some(*state),
            _ => None,
        }
    }

    pub fn set_state(&mut self, new: SessionState) {
        match &mut self.body {
            RecordBody::Dealer(m) => m.set_state(new),
            RecordBody::Decryptor { state, .. } => *state = new,
            _ => {}
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# blindpad keystore\n");
        let mut line = |k: &str, v: &dyn fmt::Display| writeln!(out, "{k} = {v}").expect("write to String");
        line("version", &FORMAT_VERSION);
        line("session_id", &self.session_id());
        line("role", &self.role());
        line("p", &self.modulus().p());
        line("l", &self.batch_len);
        let (inner, batch, blind): KeyFields<'_> =
            match &self.body {
                RecordBody::Dealer(m) => (
                    Some(m.inner_key()),
                    Some(m.outer_batch_keys()),
                    Some((m.blind_request_key(), m.blind_response_key())),
                ),
                RecordBody::Encryptor(v) => (Some(v.inner_key()), Some(v.outer_batch_keys()), None),
                RecordBody::Alice(v) => (None, Some(v.outer_batch_keys()), Some((v.blind_request_key(), v.blind_response_key()))),
                RecordBody::Decryptor { view, .. } => {
                    (Some(view.inner_key()), None, Some((view.blind_request_key(), view.blind_response_key())))
                }
            };
        if let Some(k) = inner {
            line("x_k", &k.x());
            line("y_k", &k.y());
        }
        for (j, k) in batch.into_iter().flatten().enumerate() {
            line(&format!("k_{}", j + 1), &k.value());
        }
        if let Some((k_c, k_p)) = blind {
            line("k_c", &k_c.value());
            line("k_p", &k_p.value());
        }
        if let Some(state) = self.state() {
            line("consumed", &(state == SessionState::Consumed));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, KeystoreError> {
        let mut fields = Fields::parse(text)?;
        let version = fields.take("version")?;
        if version != FORMAT_VERSION.to_string() {
            return Err(KeystoreError::UnsupportedVersion(version));
        }
        let session_id: SessionId = fields.take("session_id")?.parse().map_err(|e| invalid("session_id", e))?;
        let role_text = fields.take("role")?;
        let role = Role::from_name(&role_text).ok_or_else(|| invalid("role", format!("unknown role {role_text:?}")))?;
        let p_text = fields.take("p")?;
        let p: U256 = p_text.parse().map_err(|e| invalid("p", e))?;
        let modulus = PrimeModulus::new(p)?;
        let batch_len: usize = fields.take("l")?.parse().map_err(|e| invalid("l", e))?;
        if batch_len == 0 || U256::from(batch_len) > modulus.max_batch() {
            return Err(invalid("l", format!("{batch_len} outside 1..=p-1")));
        }

        let inner = if role.has_inner_key() {
            let x = fields.residue("x_k", modulus.p())?;
            let y = fields.residue("y_k", modulus.p())?;
            Some(TwoPadKey::new(x, y, &modulus).map_err(ProtocolError::from)?)
        } else {
            None
        };
        let batch = if role.has_batch_keys() {
            let keys = (1..=batch_len)
                .map(|j| fields.outer(&format!("k_{j}"), modulus.p_squared()))
                .collect::<Result<Vec<_>, _>>()?;
            Some(keys)
        } else {
            None
        };
        let blind = if role.has_blind_keys() {
            Some((fields.outer("k_c", modulus.p())?, fields.outer("k_p", modulus.p())?))
        } else {
            None
        };
        let state = if role.has_consumed() {
            match fields.take("consumed")?.as_str() {
                "false" => Some(SessionState::Fresh),
                "true" => Some(SessionState::Consumed),
                other => return Err(invalid("consumed", format!("expected true or false, got {other:?}"))),
            }
        } else {
            None
        };
        fields.finish()?;

        let body = match role {
            Role::Dealer => {
                let (k_c, k_p) = blind.expect("dealer has blind keys");
                RecordBody::Dealer(SessionKeyMaterial::from_parts(
                    session_id,
                    modulus,
                    inner.expect("dealer has inner key"),
                    batch.expect("dealer has batch keys"),
                    k_c,
                    k_p,
                    state.expect("dealer tracks consumption"),
                )?)
            }
            Role::Encryptor => RecordBody::Encryptor(EncryptorView::new(
                session_id,
                modulus,
                inner.expect("encryptor has inner key"),
                batch.expect("encryptor has batch keys"),
            )?),
            Role::Alice => {
                let (k_c, k_p) = blind.expect("alice has blind keys");
                RecordBody::Alice(AliceView::new(session_id, modulus, batch.expect("alice has batch keys"), k_c, k_p)?)
            }
            Role::Decryptor => {
                let (k_c, k_p) = blind.expect("decryptor has blind keys");
                RecordBody::Decryptor {
                    view: DecryptorView::new(session_id, modulus, inner.expect("decryptor has inner key"), k_c, k_p)?,
                    state: state.expect("decryptor tracks consumption"),
                }
            }
        };
        Ok(Self { batch_len, body })
    }

    pub fn load(path: &Path) -> Result<Self, KeystoreError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Writes through a temporary file, syncs it, renames it over `path` and
    /// syncs the directory, so a crash leaves either the old or the new file.
    pub fn save(&self, path: &Path) -> Result<(), KeystoreError> {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let name = path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "no file name"))?;
        let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
        {
            let mut f = File::create(&tmp)?;
            f.write_all(self.to_text().as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        // Directory fsync is not supported everywhere; the rename already happened.
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
        Ok(())
    }
}

fn invalid(field: &str, reason: impl fmt::Display) -> KeystoreError {
    KeystoreError::InvalidValue { field: field.to_owned(), reason: reason.to_string() }
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn parse(text: &str) -> Result<Self, KeystoreError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(KeystoreError::Syntax { line: i + 1, reason: "expected key = value" })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(KeystoreError::Syntax { line: i + 1, reason: "empty key or value" });
            }
            if map.insert(k.to_owned(), v.to_owned()).is_some() {
                return Err(KeystoreError::DuplicateField(k.to_owned()));
            }
        }
        Ok(Self(map))
    }

    fn take(&mut self, key: &str) -> Result<String, KeystoreError> {
        self.0.remove(key).ok_or_else(|| KeystoreError::MissingField(key.to_owned()))
    }

    fn residue(&mut self, key: &str, modulus: U256) -> Result<U256, KeystoreError> {
        let v: U256 = self.take(key)?.parse().map_err(|e| invalid(key, e))?;
        if v >= modulus {
            return Err(invalid(key, format!("{v} not below {modulus}")));
        }
        Ok(v)
    }

    fn outer(&mut self, key: &str, modulus: U256) -> Result<OuterKey, KeystoreError> {
        let v = self.residue(key, modulus)?;
        OuterKey::from_value(v, modulus).map_err(|e| invalid(key, e))
    }

    fn finish(self) -> Result<(), KeystoreError> {
        match self.0.into_keys().next() {
            Some(k) => Err(KeystoreError::UnknownField(k)),
            None => Ok(()),
        }
    }
}
